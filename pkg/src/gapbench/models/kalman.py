"""Structural state-space gap imputer.

Model: observation = level + seasonal + noise, with a local level driven by
a random walk, a smooth (constant-slope) trend feeding the level, and a
zero-sum dummy seasonal of period ``m``. State vector:

    [level, trend, s_0, ..., s_{m-2}]

Three noise variances are estimated — level process noise, seasonal process
noise, and observation noise — by maximizing the Gaussian likelihood of the
window around the gap over a 5x5x5 log-spaced grid, refined once around the
best cell. Gap points enter the filter as missing (no update step); the
imputed values are the smoothed observation means from a
Rauch-Tung-Striebel backward pass under the chosen variances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import InsufficientContext, NumericalFailure
from ..series import DEFAULT_CONTEXT_LEN, Gap, MeterSeries, check_gap_in_series
from .base import DirectImputer

DAY_PERIOD = 48

GRID_SIZE = 5
STAGE1_DECADES = (-8.0, 0.0)  # exponents relative to the data variance
STAGE2_HALF_WIDTH = 1.0       # refine +/- one decade around the best cell
DIFFUSE_KAPPA = 1e10          # prior variance as a multiple of the obs noise
BURN_FLOOR = 1e-8
LN_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class StructuralFit:
    """Chosen noise variances and the window the filter ran over."""

    m: int
    q_level: float
    q_seas: float
    h_obs: float
    loglik: float


def transition_matrix(m: int) -> np.ndarray:
    d = m + 1
    T = np.zeros((d, d))
    T[0, 0] = T[0, 1] = 1.0
    T[1, 1] = 1.0
    T[2, 2:d] = -1.0
    for j in range(3, d):
        T[j, j - 1] = 1.0
    return T


def observation_vector(m: int) -> np.ndarray:
    Z = np.zeros(m + 1)
    Z[0] = 1.0
    Z[2] = 1.0
    return Z


def _initial_state(y: np.ndarray, observed: np.ndarray, m: int):
    present = y[observed]
    x0 = np.zeros(m + 1)
    x0[0] = present[0]
    var = float(np.var(present))
    return x0, max(var, BURN_FLOOR)


def fit_noise_variances(y: np.ndarray, observed: np.ndarray, m: int) -> StructuralFit:
    """Two-stage grid search over (level, seasonal, observation) variances.

    The filter's gains are invariant under a common scaling of all
    covariances (the diffuse prior is pinned to the observation noise), so
    one normalized pass per process-to-observation ratio pair serves every
    observation-noise grid value exactly; see ``kalman_pass``.
    """
    x0, scale = _initial_state(y, observed, m)
    obs_arr = np.ascontiguousarray(observed, dtype=bool)
    pass_cache: dict[tuple[float, float], tuple[float, float, int]] = {}

    def loglik(exps):
        e_level, e_seas, e_obs = exps
        ratios = (10.0 ** (e_level - e_obs), 10.0 ** (e_seas - e_obs))
        if ratios not in pass_cache:
            pass_cache[ratios] = _kernels.kalman_pass(
                y, obs_arr, m, ratios[0], ratios[1], x0, DIFFUSE_KAPPA
            )
        slogf, sv2f, n = pass_cache[ratios]
        if n == 0 or not (np.isfinite(slogf) and np.isfinite(sv2f)):
            return -np.inf
        c = scale * 10.0 ** e_obs
        return -0.5 * (n * LN_2PI + n * np.log(c) + slogf + sv2f / c)

    def search(grids):
        best, best_ll = None, -np.inf
        for e0 in grids[0]:
            for e1 in grids[1]:
                for e2 in grids[2]:
                    ll = loglik((e0, e1, e2))
                    if ll > best_ll:
                        best, best_ll = (e0, e1, e2), ll
        return best, best_ll

    stage1 = [np.linspace(*STAGE1_DECADES, GRID_SIZE)] * 3
    best, best_ll = search(stage1)
    if best is None or not np.isfinite(best_ll):
        raise NumericalFailure("non-finite likelihood at every grid point")
    stage2 = [
        np.linspace(e - STAGE2_HALF_WIDTH, e + STAGE2_HALF_WIDTH, GRID_SIZE)
        for e in best
    ]
    best2, best_ll2 = search(stage2)
    if best_ll2 > best_ll:
        best, best_ll = best2, best_ll2
    return StructuralFit(
        m=m,
        q_level=scale * 10.0 ** best[0],
        q_seas=scale * 10.0 ** best[1],
        h_obs=scale * 10.0 ** best[2],
        loglik=best_ll,
    )


def filter_smooth(y: np.ndarray, observed: np.ndarray, fit: StructuralFit):
    """Forward filter + RTS backward smoothing under the fitted variances.

    Returns (smoothed observation means, smoothed obs variance,
    filtered obs variance) over the whole window.
    """
    m = fit.m
    d = m + 1
    n = y.size
    T = transition_matrix(m)
    Z = observation_vector(m)
    Q = np.zeros((d, d))
    Q[0, 0] = fit.q_level
    Q[2, 2] = fit.q_seas

    x0, _ = _initial_state(y, observed, m)
    x = x0.copy()
    P = np.eye(d) * (DIFFUSE_KAPPA * fit.h_obs)

    x_pred = np.empty((n, d))
    P_pred_obsvar = np.empty(n)
    x_filt = np.empty((n, d))
    P_filt = np.empty((n, d, d))

    for t in range(n):
        x = T @ x
        P = T @ P @ T.T + Q
        P = 0.5 * (P + P.T)
        x_pred[t] = x
        P_pred_obsvar[t] = P[0, 0] + 2.0 * P[0, 2] + P[2, 2]
        if observed[t]:
            u = P[:, 0] + P[:, 2]
            f = u[0] + u[2] + fit.h_obs
            if not np.isfinite(f) or f <= 0.0:
                raise NumericalFailure(f"innovation variance degenerated at step {t}")
            v = y[t] - x[0] - x[2]
            K = u / f
            x = x + K * v
            P = P - np.outer(K, u)
            P = 0.5 * (P + P.T)
        x_filt[t] = x
        P_filt[t] = P

    smoothed = np.empty(n)
    smooth_obsvar = np.empty(n)
    filt_obsvar = np.einsum("i,tij,j->t", Z, P_filt, Z)

    xs = x_filt[n - 1].copy()
    Ps = P_filt[n - 1].copy()
    smoothed[n - 1] = Z @ xs
    smooth_obsvar[n - 1] = Z @ Ps @ Z
    for t in range(n - 2, -1, -1):
        Pp_next = T @ P_filt[t] @ T.T + Q
        Pp_next = 0.5 * (Pp_next + Pp_next.T)
        B = T @ P_filt[t]
        try:
            J = np.linalg.solve(Pp_next, B).T
        except np.linalg.LinAlgError:
            J = (np.linalg.pinv(Pp_next) @ B).T
        xs = x_filt[t] + J @ (xs - x_pred[t + 1])
        Ps = P_filt[t] + J @ (Ps - Pp_next) @ J.T
        Ps = 0.5 * (Ps + Ps.T)
        smoothed[t] = Z @ xs
        smooth_obsvar[t] = Z @ Ps @ Z
    return smoothed, smooth_obsvar, filt_obsvar


def kalman_smooth_impute(
    series: MeterSeries,
    gap: Gap,
    m: int = DAY_PERIOD,
    context_len: int = DEFAULT_CONTEXT_LEN,
) -> np.ndarray:
    """Fill a gap with the smoothed observation means of the structural model.

    The filter runs over [left context, gap, right context]; contexts are
    clipped at the series bounds and may themselves contain missing points,
    which are skipped like the gap. Requires at least 2m present
    observations around the gap.
    """
    if m < 2:
        raise ValueError("seasonal period must be >= 2")
    check_gap_in_series(series, gap)
    lo = max(0, gap.start_index - context_len)
    hi = min(len(series), gap.end_index + context_len)
    y = series.values[lo:hi].copy()
    observed = ~series.missing[lo:hi].copy()
    g0 = gap.start_index - lo
    g1 = g0 + gap.length
    observed[g0:g1] = False
    y[~observed] = 0.0  # ignored by the filter, keeps the array finite

    if int(observed.sum()) < 2 * m:
        raise InsufficientContext(
            f"need {2 * m} present observations around the gap, have {int(observed.sum())}"
        )
    fit = fit_noise_variances(y, observed, m)
    smoothed, _, _ = filter_smooth(y, observed, fit)
    return smoothed[g0:g1].copy()


class KalmanSmoothingImputer(DirectImputer):
    name = "kalman_smoothing"
    category = "statistical"

    def __init__(self, m: int = DAY_PERIOD, context_len: int = DEFAULT_CONTEXT_LEN):
        self.m = m
        self.context_len = context_len

    def impute(self, series, gap):
        return kalman_smooth_impute(series, gap, self.m, self.context_len)

    def impute_diagnostics(self, series, gap):
        lo = max(0, gap.start_index - self.context_len)
        hi = min(len(series), gap.end_index + self.context_len)
        y = series.values[lo:hi].copy()
        observed = ~series.missing[lo:hi].copy()
        observed[gap.start_index - lo : gap.start_index - lo + gap.length] = False
        y[~observed] = 0.0
        fit = fit_noise_variances(y, observed, self.m)
        return {
            "q_level": fit.q_level,
            "q_seasonal": fit.q_seas,
            "h_observation": fit.h_obs,
            "loglik": fit.loglik,
        }
