# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot inner loops.

Same contracts as ``_pykernels``; see that module for the reference
semantics. Both kernels release the GIL so gap-level tasks can run on a
thread pool.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, log
from libc.string cimport memcpy

cnp.import_array()

cdef double LN_2PI = 1.8378770664093454835606594728112
cdef double FREEZE_RTOL = 1e-11
NAN = float("nan")
NEG_INF = float("-inf")


def hw_filter(y, int m, double alpha, double beta, double gamma,
              double level0, double trend0, seasonal0):
    """Additive triple-smoothing pass; see ``_pykernels.hw_filter``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s_arr = np.array(seasonal0, dtype=np.float64)
    cdef double[::1] yv = y_arr
    cdef double[::1] s = s_arr
    cdef Py_ssize_t n = y_arr.shape[0]
    cdef Py_ssize_t t, ph = 0
    cdef double level = level0, trend = trend0, sse = 0.0, base, e

    with nogil:
        for t in range(n):
            base = level + trend
            e = yv[t] - base - s[ph]
            sse += e * e
            level = base + alpha * e
            trend = trend + beta * alpha * e
            s[ph] += gamma * e
            ph += 1
            if ph == m:
                ph = 0
    return sse, level, trend, s_arr


cdef void _predict_cov(double* P, double* A, Py_ssize_t d,
                       double q_level, double q_seas) noexcept nogil:
    """P <- sym(T P T' + Q) using the sparse row/column structure of T."""
    cdef Py_ssize_t r, c
    cdef double acc
    cdef double* Ar
    # A = T P  (rows: 0 adds trend row, 1 copies, 2 is -sum of seasonal rows,
    # 3..d-1 shift up from 2..d-2)
    for c in range(d):
        A[c] = P[c] + P[d + c]
    memcpy(A + d, P + d, d * sizeof(double))
    memcpy(A + 3 * d, P + 2 * d, (d - 3) * d * sizeof(double))
    for c in range(d):
        A[2 * d + c] = -P[2 * d + c]
    for r in range(3, d):
        for c in range(d):
            A[2 * d + c] -= P[r * d + c]
    # P = A T'  (same structure on columns, row by row)
    for r in range(d):
        Ar = A + r * d
        acc = 0.0
        for c in range(2, d):
            acc += Ar[c]
        P[r * d + 0] = Ar[0] + Ar[1]
        P[r * d + 1] = Ar[1]
        memcpy(P + r * d + 3, Ar + 2, (d - 3) * sizeof(double))
        P[r * d + 2] = -acc
    P[0] += q_level
    P[2 * d + 2] += q_seas
    for r in range(d):
        for c in range(r + 1, d):
            acc = 0.5 * (P[r * d + c] + P[c * d + r])
            P[r * d + c] = acc
            P[c * d + r] = acc


cdef void _predict_state(double* x, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t j
    cdef double ssum = 0.0
    for j in range(2, d):
        ssum += x[j]
    x[0] += x[1]
    for j in range(d - 1, 2, -1):
        x[j] = x[j - 1]
    x[2] = -ssum


cdef int _run_filter(double[::1] yv, cnp.uint8_t[::1] ov, Py_ssize_t n, Py_ssize_t d,
                     double q_level, double q_seas, double h_obs,
                     double* x, double* P, double* A, double* u, double* K,
                     double* prev_u, double* out) noexcept nogil:
    """Accumulate (sum log f, sum v^2/f, n_terms) into out[0..2].

    Returns 0 on success, 1 when the innovation variance degenerates.
    """
    cdef Py_ssize_t t, i, j, n_obs = 0, streak = 0
    cdef bint frozen = False, have_prev = False
    cdef double slogf = 0.0, sv2f = 0.0
    cdef double f = 0.0, v, f_frozen = 0.0, logf_frozen = 0.0, prev_f = -1.0, du, diff
    cdef long n_terms = 0

    for t in range(n):
        _predict_state(x, d)
        if not frozen:
            _predict_cov(P, A, d, q_level, q_seas)
        if not ov[t]:
            if frozen:
                _predict_cov(P, A, d, q_level, q_seas)
                frozen = False
            streak = 0
            have_prev = False
            continue

        n_obs += 1
        if frozen:
            v = yv[t] - x[0] - x[2]
            if n_obs > d:
                slogf += logf_frozen
                sv2f += v * v / f_frozen
                n_terms += 1
            for i in range(d):
                x[i] += K[i] * v
            continue

        f = h_obs
        for i in range(d):
            u[i] = P[i * d + 0] + P[i * d + 2]
        f += u[0] + u[2]
        if not isfinite(f) or f <= 0.0:
            return 1
        v = yv[t] - x[0] - x[2]
        if n_obs > d:
            slogf += log(f)
            sv2f += v * v / f
            n_terms += 1
        for i in range(d):
            K[i] = u[i] / f
            x[i] += K[i] * v
        for i in range(d):
            for j in range(d):
                P[i * d + j] -= K[i] * u[j]
        for i in range(d):
            for j in range(i + 1, d):
                diff = 0.5 * (P[i * d + j] + P[j * d + i])
                P[i * d + j] = diff
                P[j * d + i] = diff

        if have_prev and fabs(f - prev_f) <= FREEZE_RTOL * f:
            du = 0.0
            for i in range(d):
                diff = fabs(u[i] - prev_u[i])
                if diff > du:
                    du = diff
            if du <= FREEZE_RTOL * f:
                streak += 1
            else:
                streak = 0
        else:
            streak = 0
        prev_f = f
        for i in range(d):
            prev_u[i] = u[i]
        have_prev = True
        if streak >= 2:
            frozen = True
            f_frozen = f
            logf_frozen = log(f)
            # K already holds the frozen gain

    out[0] = slogf
    out[1] = sv2f
    out[2] = <double> n_terms
    return 0


cdef tuple _filter_entry(y, observed, int m, double q_level, double q_seas,
                         double h_obs, x0, double p0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] obs_arr = np.ascontiguousarray(
        np.asarray(observed, dtype=bool).view(np.uint8))
    cdef Py_ssize_t d = m + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.array(x0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] P_arr = np.zeros((d, d), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A_arr = np.empty((d, d), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(3 * d, dtype=np.float64)
    cdef double[::1] yv = y_arr
    cdef cnp.uint8_t[::1] ov = obs_arr
    cdef Py_ssize_t n = y_arr.shape[0]
    cdef Py_ssize_t i
    cdef double out[3]
    cdef int status

    for i in range(d):
        P_arr[i, i] = p0
    with nogil:
        status = _run_filter(yv, ov, n, d, q_level, q_seas, h_obs,
                             &x_arr[0], &P_arr[0, 0], &A_arr[0, 0],
                             &work[0], &work[d], &work[2 * d], out)
    if status != 0:
        return NAN, NAN, 0
    return out[0], out[1], int(out[2])


def kalman_loglik(y, observed, int m, double q_level, double q_seas,
                  double h_obs, x0, double p0):
    """Gaussian log-likelihood; see ``_pykernels.kalman_loglik``."""
    slogf, sv2f, n = _filter_entry(y, observed, m, q_level, q_seas, h_obs, x0, p0)
    if not (isfinite(slogf) and isfinite(sv2f)):
        return NEG_INF
    return -0.5 * (n * LN_2PI + slogf + sv2f)


def kalman_pass(y, observed, int m, double r_level, double r_seas, x0, double kappa):
    """Normalized filter pass; see ``_pykernels.kalman_pass``."""
    return _filter_entry(y, observed, m, r_level, r_seas, 1.0, x0, kappa)
