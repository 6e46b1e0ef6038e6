"""The four baseline methods: straight-line extrapolation (SLP), padded
last value, last-week repetition, and linear interpolation across the gap."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyHistory, HistoryTooShort, MissingEndpoint
from ..series import Gap, MeterSeries, check_gap_in_series
from .base import DirectImputer, Forecaster, check_horizon

DEFAULT_SLP_FIT_WINDOW = 48
WEEK_PERIOD = 336


def slp_forecast(history: np.ndarray, horizon: int, fit_window: int = DEFAULT_SLP_FIT_WINDOW) -> np.ndarray:
    """Least-squares line through the trailing ``fit_window`` points,
    extrapolated ``horizon`` steps ahead."""
    history = np.asarray(history, dtype=np.float64)
    check_horizon(horizon)
    if fit_window < 2:
        raise HistoryTooShort("slp needs a fit window of at least 2 points")
    if history.size < fit_window:
        raise HistoryTooShort(
            f"slp needs {fit_window} points, history has {history.size}"
        )
    tail = history[-fit_window:]
    w = float(fit_window)
    x = np.arange(fit_window, dtype=np.float64)
    xbar = (w - 1.0) / 2.0
    ybar = tail.mean()
    denom = w * (w * w - 1.0) / 12.0  # sum of (x - xbar)^2 in closed form
    slope = np.dot(tail, x - xbar) / denom
    xstar = fit_window + np.arange(horizon, dtype=np.float64)
    return ybar + slope * (xstar - xbar)


def padded_last_forecast(history: np.ndarray, horizon: int) -> np.ndarray:
    """Repeat the last observed value."""
    history = np.asarray(history, dtype=np.float64)
    check_horizon(horizon)
    if history.size == 0:
        raise EmptyHistory("padded-last needs at least one point")
    return np.full(horizon, history[-1])


def last_week_forecast(history: np.ndarray, horizon: int, period: int = WEEK_PERIOD) -> np.ndarray:
    """Repeat the trailing ``period`` points cyclically."""
    history = np.asarray(history, dtype=np.float64)
    check_horizon(horizon)
    if history.size < period:
        raise HistoryTooShort(
            f"last-week needs {period} points, history has {history.size}"
        )
    tail = history[history.size - period :]
    idx = np.arange(horizon) % period
    return tail[idx]


def linear_interpolation_impute(series: MeterSeries, gap: Gap) -> np.ndarray:
    """Straight line between the observations bracketing the gap."""
    check_gap_in_series(series, gap)
    left_idx = gap.start_index - 1
    right_idx = gap.end_index
    if left_idx < 0 or bool(series.missing[left_idx]):
        raise MissingEndpoint(f"no observed value immediately before index {gap.start_index}")
    if right_idx >= len(series) or bool(series.missing[right_idx]):
        raise MissingEndpoint(f"no observed value immediately after index {gap.end_index - 1}")
    left = series.values[left_idx]
    right = series.values[right_idx]
    steps = np.arange(1, gap.length + 1, dtype=np.float64)
    return left + (right - left) * steps / (gap.length + 1)


class SlpForecaster(Forecaster):
    name = "slp"
    category = "baseline"

    def __init__(self, fit_window: int = DEFAULT_SLP_FIT_WINDOW):
        self.fit_window = fit_window
        self.min_history = fit_window

    def forecast(self, history, horizon):
        return slp_forecast(history, horizon, self.fit_window)


class PaddedLastForecaster(Forecaster):
    name = "padded_last"
    category = "baseline"
    min_history = 1

    def forecast(self, history, horizon):
        return padded_last_forecast(history, horizon)


class LastWeekForecaster(Forecaster):
    name = "last_week"
    category = "baseline"

    def __init__(self, period: int = WEEK_PERIOD):
        self.period = period
        self.min_history = period

    def forecast(self, history, horizon):
        return last_week_forecast(history, horizon, self.period)


class LinearInterpolationImputer(DirectImputer):
    name = "linear_interpolation"
    category = "baseline"

    def impute(self, series, gap):
        return linear_interpolation_impute(series, gap)
