"""gapbench: a gap-filling benchmark for regularly sampled consumption series.

Missing stretches are treated as a bidirectional forecasting problem: a
forward prediction from the week before the gap and a reversed backward
prediction from the week after are blended with linearly fading weights.
The package ships a native roster of baseline, statistical, and ML
forecasters, a subprocess protocol for external backends, seeded artificial
gap injection, and five-metric per-household reporting.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend
from .engine import impute_gap, interpolate, run_benchmark
from .gaps import apply_plan, generate_plan
from .metrics import score_gap
from .series import Gap, MeterSeries, SamplingSpec, Window

__all__ = [
    "__version__",
    "kernel_backend",
    "interpolate",
    "impute_gap",
    "run_benchmark",
    "generate_plan",
    "apply_plan",
    "score_gap",
    "Gap",
    "MeterSeries",
    "SamplingSpec",
    "Window",
]
