"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it is
absent or when ``GAPBENCH_PURE_PYTHON`` is set (any non-empty value).
``BACKEND`` records which one is active.
"""

import os

from . import _pykernels

if os.environ.get("GAPBENCH_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

hw_filter = _impl.hw_filter
kalman_loglik = _impl.kalman_loglik
kalman_pass = _impl.kalman_pass

__all__ = ["hw_filter", "kalman_loglik", "kalman_pass", "BACKEND"]
