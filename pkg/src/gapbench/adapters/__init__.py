"""Bundled adapter executables (run with ``python -m gapbench.adapters.<name>``)."""
