import numpy as np
import pytest

from gapbench.errors import InsufficientContext, NumericalFailure
from gapbench.models.kalman import (
    StructuralFit,
    filter_smooth,
    fit_noise_variances,
    kalman_smooth_impute,
    observation_vector,
    transition_matrix,
)
from gapbench.series import Gap

from conftest import make_series


def interior_gap_series(signal, gap_start, gap_len):
    s = make_series(signal)
    return s, Gap(gap_start, gap_len)


class TestExactRecovery:
    def test_noiseless_linear_ramp(self):
        n = 336 + 24 + 336
        t = np.arange(n, dtype=float)
        y = 1.0 + 0.01 * t
        s, gap = interior_gap_series(y, 336, 24)
        out = kalman_smooth_impute(s, gap, m=48)
        np.testing.assert_allclose(out, y[336:360], atol=1e-6)

    def test_constant_series(self):
        n = 300
        s, gap = interior_gap_series(np.full(n, 3.0), 120, 10)
        out = kalman_smooth_impute(s, gap, m=12, context_len=120)
        np.testing.assert_allclose(out, 3.0, atol=1e-9)

    def test_noiseless_seasonal(self):
        m = 48
        n = 336 + m + 336
        t = np.arange(n, dtype=float)
        amplitude = 1.0
        y = 2.0 + amplitude * np.sin(2 * np.pi * t / m)
        s, gap = interior_gap_series(y, 336, m)
        out = kalman_smooth_impute(s, gap, m=m)
        np.testing.assert_allclose(out, y[336 : 336 + m], atol=1e-4 * amplitude)


class TestPreconditionsAndFailure:
    def test_insufficient_context(self):
        s, gap = interior_gap_series(np.ones(60), 20, 10)
        with pytest.raises(InsufficientContext):
            kalman_smooth_impute(s, gap, m=24, context_len=30)

    def test_numerical_failure_on_degenerate_scale(self):
        # variance overflows to inf, every grid likelihood is non-finite
        y = np.full(200, 1e200)
        y[::2] = 0.0
        observed = np.ones(200, dtype=bool)
        with pytest.raises((NumericalFailure, OverflowError)):
            fit_noise_variances(y, observed, m=4)

    def test_period_must_be_at_least_two(self):
        s, gap = interior_gap_series(np.ones(200), 90, 5)
        with pytest.raises(ValueError):
            kalman_smooth_impute(s, gap, m=1)


class TestFilterInvariants:
    def _fixture(self):
        rng = np.random.default_rng(6)
        n = 260
        t = np.arange(n, dtype=float)
        y = 2 + 0.5 * np.sin(2 * np.pi * t / 12) + 0.1 * rng.normal(size=n)
        observed = np.ones(n, dtype=bool)
        observed[120:135] = False
        return y, observed

    def test_covariances_stay_psd(self):
        y, observed = self._fixture()
        m = 12
        d = m + 1
        fit = StructuralFit(m=m, q_level=1e-3, q_seas=1e-4, h_obs=1e-2, loglik=0.0)
        T = transition_matrix(m)
        Q = np.zeros((d, d))
        Q[0, 0] = fit.q_level
        Q[2, 2] = fit.q_seas
        x = np.zeros(d)
        x[0] = y[0]
        P = np.eye(d) * 1e6
        for t in range(y.size):
            x = T @ x
            P = T @ P @ T.T + Q
            P = 0.5 * (P + P.T)
            if observed[t]:
                u = P[:, 0] + P[:, 2]
                f = u[0] + u[2] + fit.h_obs
                K = u / f
                x = x + K * (y[t] - x[0] - x[2])
                P = P - np.outer(K, u)
                P = 0.5 * (P + P.T)
            eig_min = np.linalg.eigvalsh(P).min()
            assert eig_min >= -1e-8 * np.trace(P)

    def test_smoothed_variance_not_above_filtered(self):
        y, observed = self._fixture()
        fit = fit_noise_variances(y, observed, m=12)
        _, smooth_var, filt_var = filter_smooth(y, observed, fit)
        assert np.all(smooth_var <= filt_var + 1e-9 * (1.0 + filt_var))

    def test_smoothed_means_match_observations_loosely(self):
        y, observed = self._fixture()
        fit = fit_noise_variances(y, observed, m=12)
        smoothed, _, _ = filter_smooth(y, observed, fit)
        # after burn-in the smoother tracks the observed signal
        err = np.abs(smoothed[observed][30:] - y[observed][30:])
        assert err.mean() < 0.2


class TestModelMatrices:
    def test_transition_seasonal_rotation(self):
        m = 4
        T = transition_matrix(m)
        x = np.array([1.0, 0.5, 0.3, -0.2, 0.1])
        out = T @ x
        assert out[0] == 1.5  # level + trend
        assert out[1] == 0.5
        assert out[2] == pytest.approx(-(0.3 - 0.2 + 0.1))
        np.testing.assert_allclose(out[3:], [0.3, -0.2])

    def test_observation_picks_level_plus_seasonal(self):
        Z = observation_vector(4)
        x = np.array([2.0, 9.0, 0.25, 0.0, 0.0])
        assert Z @ x == 2.25

    def test_seasonal_states_sum_cycles_to_zero(self):
        # iterating the transition m times returns the seasonal block's sum
        m = 6
        T = transition_matrix(m)
        x = np.zeros(m + 1)
        x[2:] = np.array([0.4, -0.1, 0.3, -0.6, 0.2])
        total = x[2:].sum()
        for _ in range(m):
            x = T @ x
        # dummy seasonal constraint: over one full cycle the values repeat
        assert x[2:].sum() == pytest.approx(total, abs=1e-12)
