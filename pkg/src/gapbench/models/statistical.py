"""Native statistical forecasters: seasonal naive, additive Holt-Winters,
ARIMA via Hannan-Rissanen least squares, and a multi-seasonal moving-average
decomposition forecaster.

All fitting here is closed-form least squares except the Holt-Winters
smoothing weights, which are found by bounded Nelder-Mead over the one-step
sum of squared errors (the SSE recursion itself runs in the compiled kernel
when available).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .. import _kernels
from ..errors import HistoryTooShort, NonStationaryFit
from .base import Forecaster, check_horizon

DAY_PERIOD = 48
WEEK_PERIOD = 336

# ---------------------------------------------------------------------------
# Seasonal naive
# ---------------------------------------------------------------------------


def seasonal_naive_forecast(history: np.ndarray, horizon: int, m: int = DAY_PERIOD) -> np.ndarray:
    """Repeat the trailing season of length ``m``."""
    history = np.asarray(history, dtype=np.float64)
    check_horizon(horizon)
    if history.size < m:
        raise HistoryTooShort(f"seasonal naive needs {m} points, history has {history.size}")
    tail = history[history.size - m :]
    return tail[np.arange(horizon) % m]


class SeasonalNaiveForecaster(Forecaster):
    name = "seasonal_naive"
    category = "statistical"

    def __init__(self, m: int = DAY_PERIOD):
        self.m = m
        self.min_history = m

    def forecast(self, history, horizon):
        return seasonal_naive_forecast(history, horizon, self.m)


# ---------------------------------------------------------------------------
# Holt-Winters (additive level + trend + seasonal)
# ---------------------------------------------------------------------------

HW_START = (0.3, 0.05, 0.3)
HW_MAX_ITER = 500
HW_TOL = 1e-6


@dataclass(frozen=True)
class HoltWintersParams:
    """Fitted smoothing weights and final state of the additive recursion.

    ``seasonal`` is phase-indexed: entry ``j`` applies at absolute step
    ``t`` with ``t % m == j``; ``n_obs`` is the number of points the state
    was run over, so the forecast for step ``n_obs + h`` uses phase
    ``(n_obs + h) % m``. Seasonal entries are normalized to sum to zero
    (the shift is absorbed into the level).
    """

    alpha: float
    beta: float
    gamma: float
    m: int
    level: float
    trend: float
    seasonal: np.ndarray
    n_obs: int
    sse: float = 0.0


def _hw_initial_state(y: np.ndarray, m: int):
    """Classical-decomposition start values from the first two seasons.

    A line is anchored on the two season means (exact for a pure
    level+trend+seasonal signal); the seasonal start values are the phase
    means of the detrended first two seasons.
    """
    first = y[:m].mean()
    second = y[m : 2 * m].mean()
    slope = (second - first) / m
    intercept = y[: 2 * m].mean() - slope * (2 * m - 1) / 2.0
    detrended = y[: 2 * m] - (intercept + slope * np.arange(2 * m))
    seasonal = 0.5 * (detrended[:m] + detrended[m:])
    seasonal = seasonal - seasonal.mean()
    # state "before" the first observation
    return intercept - slope, slope, seasonal


def holt_winters_fit(history: np.ndarray, m: int = DAY_PERIOD) -> HoltWintersParams:
    """Fit (alpha, beta, gamma) by minimizing in-sample one-step SSE.

    Bounded Nelder-Mead from (0.3, 0.05, 0.3), 500 iteration cap, simplex
    tolerance 1e-6. A zero-variance history short-circuits to the lower
    bounds with a constant forecast (flatlining meters are not an error).
    """
    y = np.ascontiguousarray(history, dtype=np.float64)
    if y.size < 2 * m:
        raise HistoryTooShort(f"holt-winters needs {2 * m} points, history has {y.size}")
    if np.ptp(y) == 0.0:
        return HoltWintersParams(
            alpha=0.0, beta=0.0, gamma=0.0, m=m,
            level=float(y[0]), trend=0.0, seasonal=np.zeros(m), n_obs=y.size,
        )

    level0, trend0, seasonal0 = _hw_initial_state(y, m)

    def objective(params):
        a, b, g = np.clip(params, 0.0, 1.0)
        sse, _, _, _ = _kernels.hw_filter(y, m, a, b, g, level0, trend0, seasonal0)
        return sse

    res = minimize(
        objective,
        x0=np.array(HW_START),
        method="Nelder-Mead",
        bounds=[(0.0, 1.0)] * 3,
        options={"maxiter": HW_MAX_ITER, "xatol": HW_TOL, "fatol": HW_TOL, "adaptive": False},
    )
    alpha, beta, gamma = np.clip(res.x, 0.0, 1.0)
    sse, level, trend, seasonal = _kernels.hw_filter(
        y, m, alpha, beta, gamma, level0, trend0, seasonal0
    )
    shift = seasonal.mean()
    return HoltWintersParams(
        alpha=float(alpha), beta=float(beta), gamma=float(gamma), m=m,
        level=float(level + shift), trend=float(trend),
        seasonal=seasonal - shift, n_obs=y.size, sse=float(sse),
    )


def holt_winters_forecast(params: HoltWintersParams, horizon: int) -> np.ndarray:
    """level + (h+1)*trend + the matching seasonal phase, no damping."""
    check_horizon(horizon)
    h = np.arange(horizon)
    phases = (params.n_obs + h) % params.m
    return params.level + (h + 1) * params.trend + params.seasonal[phases]


class HoltWintersForecaster(Forecaster):
    name = "holt_winters"
    category = "statistical"

    def __init__(self, m: int = DAY_PERIOD):
        self.m = m
        self.min_history = 2 * m

    def forecast(self, history, horizon):
        return holt_winters_forecast(holt_winters_fit(history, self.m), horizon)

    def fit_diagnostics(self, history):
        p = holt_winters_fit(history, self.m)
        return {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma,
                "level": p.level, "trend": p.trend, "sse": p.sse}


# ---------------------------------------------------------------------------
# ARIMA (Hannan-Rissanen estimation)
# ---------------------------------------------------------------------------

MAX_PQ = 10
MAX_D = 2
STATIONARITY_TOL = 1e-6


@dataclass(frozen=True)
class ArimaParams:
    """Fitted ARIMA(p,d,q): AR/MA coefficients on the differenced scale.

    ``intercept`` is the mean of the differenced series when d == 0 and 0
    otherwise (differenced models are drift-free, so an integrated model
    with no ARMA terms forecasts flat).
    """

    p: int
    d: int
    q: int
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    intercept: float = 0.0


def _lag_matrix(z: np.ndarray, order: int) -> np.ndarray:
    """Rows t -> [z[t-1], ..., z[t-order]] for t = order..len(z)-1."""
    return np.column_stack([z[order - j : len(z) - j] for j in range(1, order + 1)])


def _check_order(p: int, d: int, q: int) -> None:
    if not (0 <= p <= MAX_PQ and 0 <= q <= MAX_PQ):
        raise ValueError(f"AR/MA orders must be in 0..{MAX_PQ}")
    if not (0 <= d <= MAX_D):
        raise ValueError(f"differencing order must be in 0..{MAX_D}")


def _ar_roots_stationary(phi: np.ndarray) -> bool:
    if phi.size == 0:
        return True
    # roots of 1 - phi_1 z - ... - phi_p z^p, highest power first
    poly = np.concatenate((-phi[::-1], [1.0]))
    roots = np.roots(poly)
    if roots.size == 0:
        return True
    return bool(np.min(np.abs(roots)) > 1.0 + STATIONARITY_TOL)


def arima_fit(history: np.ndarray, order: tuple[int, int, int]) -> ArimaParams:
    """Estimate AR/MA coefficients by the two-stage least-squares procedure:
    a long autoregression provides residual proxies, then the ARMA
    coefficients come from one regression on lagged values and lagged
    residual proxies."""
    p, d, q = order
    _check_order(p, d, q)
    y = np.asarray(history, dtype=np.float64)
    if y.size < 10 * (p + q) + d + 20:
        raise HistoryTooShort(
            f"arima({p},{d},{q}) needs {10 * (p + q) + d + 20} points, history has {y.size}"
        )
    w = np.diff(y, n=d) if d > 0 else y
    mu = float(w.mean()) if d == 0 else 0.0
    z = w - mu
    n = z.size

    if p == 0 and q == 0:
        return ArimaParams(p=p, d=d, q=q, intercept=mu)

    if q == 0:
        X = _lag_matrix(z, p)
        phi, *_ = np.linalg.lstsq(X, z[p:], rcond=None)
        theta = np.zeros(0)
    else:
        r = min(20, n // 4)
        r = max(r, p + q + 1)
        Xr = _lag_matrix(z, r)
        ar_long, *_ = np.linalg.lstsq(Xr, z[r:], rcond=None)
        resid = np.concatenate([np.zeros(r), z[r:] - Xr @ ar_long])
        start = max(p, r + q)
        cols = [z[start - j : n - j] for j in range(1, p + 1)]
        cols += [resid[start - j : n - j] for j in range(1, q + 1)]
        X = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(X, z[start:], rcond=None)
        phi = coef[:p]
        theta = coef[p:]

    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64)) if q else np.zeros(0)
    if not _ar_roots_stationary(phi):
        raise NonStationaryFit(f"estimated AR polynomial has roots inside the unit circle: phi={phi}")
    return ArimaParams(p=p, d=d, q=q, phi=phi, theta=theta, intercept=mu)


def arima_forecast(model: ArimaParams, history: np.ndarray, horizon: int) -> np.ndarray:
    """Iterate the ARMA recursion with future shocks at zero, then undo the
    differencing with cumulative sums anchored at the last observed levels."""
    check_horizon(horizon)
    y = np.asarray(history, dtype=np.float64)
    w = np.diff(y, n=model.d) if model.d > 0 else y
    z = w - model.intercept
    n = z.size
    p, q = model.p, model.q

    eps = np.zeros(n)
    for t in range(n):
        acc = 0.0
        for i in range(1, min(p, t) + 1):
            acc += model.phi[i - 1] * z[t - i]
        for j in range(1, min(q, t) + 1):
            acc += model.theta[j - 1] * eps[t - j]
        eps[t] = z[t] - acc

    zext = np.concatenate([z, np.zeros(horizon)])
    for h in range(horizon):
        t = n + h
        acc = 0.0
        for i in range(1, p + 1):
            if t - i >= 0:
                acc += model.phi[i - 1] * zext[t - i]
        for j in range(1, q + 1):
            if 0 <= t - j < n:
                acc += model.theta[j - 1] * eps[t - j]
        zext[t] = acc
    fc = zext[n:] + model.intercept

    # invert differencing, innermost level first
    levels = [y]
    for _ in range(model.d):
        levels.append(np.diff(levels[-1]))
    for k in range(model.d, 0, -1):
        fc = levels[k - 1][-1] + np.cumsum(fc)
    return fc


def choose_differencing(history: np.ndarray) -> int:
    """Single variance-reduction test: difference once if it lowers variance."""
    y = np.asarray(history, dtype=np.float64)
    if y.size < 3:
        return 0
    return 1 if np.var(np.diff(y)) < np.var(y) else 0


class ArimaForecaster(Forecaster):
    name = "arima"
    category = "statistical"

    def __init__(self, p: int = 3, d: int | None = None, q: int = 1):
        self.p = p
        self.d = d  # None -> variance-reduction test per history
        self.q = q
        self.min_history = 10 * (p + q) + (d if d is not None else 1) + 20

    def _order(self, history):
        d = self.d if self.d is not None else choose_differencing(history)
        return (self.p, d, self.q)

    def forecast(self, history, horizon):
        model = arima_fit(history, self._order(history))
        return arima_forecast(model, history, horizon)

    def fit_diagnostics(self, history):
        model = arima_fit(history, self._order(history))
        out = {"p": model.p, "d": model.d, "q": model.q, "intercept": model.intercept}
        for i, v in enumerate(model.phi, 1):
            out[f"phi_{i}"] = float(v)
        for i, v in enumerate(model.theta, 1):
            out[f"theta_{i}"] = float(v)
        return out


# ---------------------------------------------------------------------------
# Multi-seasonal decomposition (moving-average flavor)
# ---------------------------------------------------------------------------

MSTL_PERIODS = (DAY_PERIOD, WEEK_PERIOD)
MSTL_ITERATIONS = 3
_PHASE_SMOOTH_WINDOW = 3


@dataclass(frozen=True)
class MstlDecomposition:
    """trend + one seasonal per period + remainder; sums back to the input."""

    trend: np.ndarray
    seasonals: dict[int, np.ndarray]
    remainder: np.ndarray
    n: int


def _cma(x: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average, windows truncated at the edges."""
    n = x.size
    half = window // 2
    cs = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    lo = np.maximum(0, idx - half)
    hi = np.minimum(n, idx + half + 1)
    return (cs[hi] - cs[lo]) / (hi - lo)


def _seasonal_component(z: np.ndarray, period: int) -> np.ndarray:
    """Smooth each phase's sub-series (window-3 centered mean across cycles),
    then pull the overall mean out so the seasonal is centered on zero."""
    out = np.empty_like(z)
    for j in range(period):
        sub = z[j::period]
        out[j::period] = _cma(sub, _PHASE_SMOOTH_WINDOW)
    return out - out.mean()


def mstl_decompose(history: np.ndarray, periods=MSTL_PERIODS) -> MstlDecomposition:
    """Iterative decomposition: per-period seasonal extraction against the
    current other components, then a trend re-estimate by centered moving
    average of the deseasonalized series."""
    x = np.asarray(history, dtype=np.float64)
    periods = tuple(int(p) for p in periods)
    if not periods:
        raise ValueError("at least one period is required")
    if any(p < 2 for p in periods):
        raise ValueError("periods must be >= 2")
    if list(periods) != sorted(periods):
        raise ValueError("periods must be sorted ascending")
    if x.size < 2 * max(periods):
        raise HistoryTooShort(
            f"decomposition needs {2 * max(periods)} points, history has {x.size}"
        )
    trend_window = max(periods) + 1
    trend = _cma(x, trend_window)
    seasonals = {p: np.zeros_like(x) for p in periods}
    for _ in range(MSTL_ITERATIONS):
        for p in periods:
            others = trend.copy()
            for q in periods:
                if q != p:
                    others += seasonals[q]
            seasonals[p] = _seasonal_component(x - others, p)
        deseason = x.copy()
        for p in periods:
            deseason -= seasonals[p]
        trend = _cma(deseason, trend_window)
    remainder = x - trend
    for p in periods:
        remainder = remainder - seasonals[p]
    return MstlDecomposition(trend=trend, seasonals=seasonals, remainder=remainder, n=x.size)


def mstl_forecast(decomp: MstlDecomposition, horizon: int) -> np.ndarray:
    """Trend extended by its average first difference, seasonals extended
    periodically from their last cycle, remainder forecast as zero."""
    check_horizon(horizon)
    if horizon == 0:
        return np.zeros(0)
    n = decomp.n
    trend = decomp.trend
    drift = (trend[-1] - trend[0]) / (n - 1) if n > 1 else 0.0
    h = np.arange(horizon)
    out = trend[-1] + (h + 1) * drift
    for p, seas in decomp.seasonals.items():
        phase = (n + h) % p
        last_same_phase = n - 1 - ((n - 1 - phase) % p)
        out = out + seas[last_same_phase]
    return out


class MstlForecaster(Forecaster):
    """Roster wrapper; drops periods that do not fit twice into the history
    (the default pipeline context is one week, so the weekly seasonal only
    engages with longer configured contexts)."""

    name = "mstl"
    category = "statistical"

    def __init__(self, periods=MSTL_PERIODS):
        self.periods = tuple(sorted(int(p) for p in periods))
        self.min_history = 2 * min(self.periods)

    def forecast(self, history, horizon):
        history = np.asarray(history, dtype=np.float64)
        usable = tuple(p for p in self.periods if 2 * p <= history.size)
        if not usable:
            raise HistoryTooShort(
                f"history of {history.size} fits none of the periods {self.periods}"
            )
        return mstl_forecast(mstl_decompose(history, usable), horizon)
