"""Model roster: native forecasters and direct imputers, plus the registry
used by config parsing and report categorization."""

from __future__ import annotations

from .base import DirectImputer, Forecaster
from .baselines import (
    LastWeekForecaster,
    LinearInterpolationImputer,
    PaddedLastForecaster,
    SlpForecaster,
)
from .kalman import KalmanSmoothingImputer
from .knn import KnnForecaster
from .statistical import (
    ArimaForecaster,
    HoltWintersForecaster,
    MstlForecaster,
    SeasonalNaiveForecaster,
)

#: Constructors for every native model, keyed by roster name.
REGISTRY = {
    "slp": SlpForecaster,
    "padded_last": PaddedLastForecaster,
    "last_week": LastWeekForecaster,
    "linear_interpolation": LinearInterpolationImputer,
    "seasonal_naive": SeasonalNaiveForecaster,
    "holt_winters": HoltWintersForecaster,
    "arima": ArimaForecaster,
    "mstl": MstlForecaster,
    "kalman_smoothing": KalmanSmoothingImputer,
    "knn": KnnForecaster,
}

#: Human-table grouping order.
CATEGORY_ORDER = ("baseline", "statistical", "ml", "external")


def build_model(name: str, params: dict | None = None):
    if name not in REGISTRY:
        raise KeyError(f"unknown model {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](**(params or {}))


def default_roster() -> list:
    """One instance of every native model with default hyperparameters."""
    return [cls() for cls in REGISTRY.values()]


def category_of(name: str) -> str:
    cls = REGISTRY.get(name)
    return cls.category if cls is not None else "external"


__all__ = [
    "Forecaster",
    "DirectImputer",
    "REGISTRY",
    "CATEGORY_ORDER",
    "build_model",
    "default_roster",
    "category_of",
]
