"""Pure-Python (numpy) implementations of the hot inner loops.

These are the reference semantics for the compiled kernels in
``_ckernels.pyx``; both backends must produce the same numbers to within
floating-point noise. The compiled module is preferred at import time, this
module is the fallback (and the ground truth for the agreement tests).
"""

from __future__ import annotations

import math

import numpy as np

LN_2PI = math.log(2.0 * math.pi)

# Relative tolerance for detecting a converged (steady-state) filter; once the
# innovation variance and gain stop moving, they are frozen until a missing
# observation perturbs the covariance recursion again.
_FREEZE_RTOL = 1e-11


def hw_filter(y, m, alpha, beta, gamma, level0, trend0, seasonal0):
    """Additive triple-smoothing pass over ``y``.

    Runs the level/trend/seasonal recursion from the given initial state and
    accumulates the one-step-ahead squared prediction error. Returns
    ``(sse, level, trend, seasonal)`` with the final state; ``seasonal`` is
    phase-indexed (slot ``t % m``).
    """
    y = np.asarray(y, dtype=np.float64)
    s = np.array(seasonal0, dtype=np.float64)
    level = float(level0)
    trend = float(trend0)
    sse = 0.0
    ph = 0
    for t in range(y.shape[0]):
        base = level + trend
        e = y[t] - base - s[ph]
        sse += e * e
        level = base + alpha * e
        trend = trend + beta * alpha * e
        s[ph] += gamma * e
        ph += 1
        if ph == m:
            ph = 0
    return sse, level, trend, s


def _predict_state(x):
    """In-place transition: level += trend, seasonal block rotates."""
    ssum = x[2:].sum()
    x[0] += x[1]
    x[3:] = x[2:-1].copy()
    x[2] = -ssum


def _predict_cov(P, q_level, q_seas):
    """P -> sym(T P T' + Q) for the level/trend/seasonal transition."""
    d = P.shape[0]
    A = np.empty_like(P)
    A[0] = P[0] + P[1]
    A[1] = P[1]
    A[2] = -P[2:].sum(axis=0)
    A[3:] = P[2:-1]
    out = np.empty_like(P)
    out[:, 0] = A[:, 0] + A[:, 1]
    out[:, 1] = A[:, 1]
    out[:, 2] = -A[:, 2:].sum(axis=1)
    out[:, 3:] = A[:, 2 : d - 1]
    out[0, 0] += q_level
    out[2, 2] += q_seas
    return 0.5 * (out + out.T)


def _run_filter(y, observed, m, q_level, q_seas, h_obs, x0, p0):
    """Innovation accumulators (sum log f, sum v^2/f, count) after burn-in.

    The first ``m+1`` observed innovations are burn-in (the diffuse prior
    dominates them) and are excluded. Returns counts of ``nan`` when the
    innovation variance degenerates.
    """
    y = np.asarray(y, dtype=np.float64)
    observed = np.asarray(observed, dtype=bool)
    d = m + 1
    x = np.array(x0, dtype=np.float64)
    P = np.zeros((d, d))
    np.fill_diagonal(P, p0)

    slogf = 0.0
    sv2f = 0.0
    n_terms = 0
    n_obs = 0
    frozen = False
    streak = 0
    f_frozen = 0.0
    logf_frozen = 0.0
    K_frozen = None
    prev_f = -1.0
    prev_u = None

    for t in range(y.shape[0]):
        _predict_state(x)
        if not frozen:
            P = _predict_cov(P, q_level, q_seas)
        if not observed[t]:
            if frozen:
                # resume the covariance recursion from the converged value
                P = _predict_cov(P, q_level, q_seas)
                frozen = False
            streak = 0
            prev_f = -1.0
            prev_u = None
            continue

        n_obs += 1
        if frozen:
            v = y[t] - x[0] - x[2]
            if n_obs > d:
                slogf += logf_frozen
                sv2f += v * v / f_frozen
                n_terms += 1
            x += K_frozen * v
            continue

        u = P[:, 0] + P[:, 2]
        f = u[0] + u[2] + h_obs
        if not math.isfinite(f) or f <= 0.0:
            return math.nan, math.nan, 0
        v = y[t] - x[0] - x[2]
        if n_obs > d:
            slogf += math.log(f)
            sv2f += v * v / f
            n_terms += 1
        K = u / f
        x += K * v
        P = P - np.outer(K, u)
        P = 0.5 * (P + P.T)

        if prev_u is not None and abs(f - prev_f) <= _FREEZE_RTOL * f and (
            np.max(np.abs(u - prev_u)) <= _FREEZE_RTOL * f
        ):
            streak += 1
        else:
            streak = 0
        prev_f = f
        prev_u = u
        if streak >= 2:
            frozen = True
            f_frozen = f
            logf_frozen = math.log(f)
            K_frozen = K

    return slogf, sv2f, n_terms


def kalman_loglik(y, observed, m, q_level, q_seas, h_obs, x0, p0):
    """Gaussian log-likelihood of the structural model at one variance triple."""
    slogf, sv2f, n = _run_filter(y, observed, m, q_level, q_seas, h_obs, x0, p0)
    if not (math.isfinite(slogf) and math.isfinite(sv2f)):
        return -math.inf
    return -0.5 * (n * LN_2PI + slogf + sv2f)


def kalman_pass(y, observed, m, r_level, r_seas, x0, kappa):
    """One normalized filter pass (observation noise 1, prior ``kappa``).

    Returns ``(sum log f, sum v^2/f, n)``. Because gains are invariant under
    a common scaling of all covariances, the log-likelihood at observation
    noise ``c`` with process noises ``(c*r_level, c*r_seas)`` and prior
    ``c*kappa`` is recovered in closed form:

        ll(c) = -0.5 * (n*log(2*pi) + n*log(c) + sum_logf + sum_v2f / c)

    which lets one pass serve every grid cell sharing the noise ratios.
    """
    return _run_filter(y, observed, m, r_level, r_seas, 1.0, x0, kappa)
