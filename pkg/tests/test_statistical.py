import numpy as np
import pytest

from gapbench.errors import HistoryTooShort
from gapbench.models.statistical import (
    ArimaParams,
    HoltWintersParams,
    MstlForecaster,
    arima_fit,
    arima_forecast,
    choose_differencing,
    holt_winters_fit,
    holt_winters_forecast,
    mstl_decompose,
    mstl_forecast,
    seasonal_naive_forecast,
)


class TestSeasonalNaive:
    def test_index_formula(self):
        out = seasonal_naive_forecast(np.array([1.0, 2.0, 3.0, 1.0, 2.0, 3.0]), 2, m=3)
        np.testing.assert_array_equal(out, [1.0, 2.0])

    def test_periodic_fixed_point(self):
        cycle = np.sin(2 * np.pi * np.arange(48) / 48) + 2
        hist = np.tile(cycle, 7)
        out = seasonal_naive_forecast(hist, 96, m=48)
        np.testing.assert_array_equal(out, np.tile(cycle, 2))

    def test_history_too_short(self):
        with pytest.raises(HistoryTooShort):
            seasonal_naive_forecast(np.ones(47), 5, m=48)

    def test_shift_equivariance_exact(self):
        hist = np.arange(12.0)
        np.testing.assert_array_equal(
            seasonal_naive_forecast(hist + 2.0, 6, m=4),
            seasonal_naive_forecast(hist, 6, m=4) + 2.0,
        )


class TestHoltWinters:
    def test_noiseless_signal_near_exact_fit(self):
        m = 24
        t = np.arange(6 * m, dtype=float)
        seasonal = np.sin(2 * np.pi * t / m)
        y = 3.0 + 0.01 * t + seasonal
        params = holt_winters_fit(y, m)
        scale = np.var(y)
        assert params.sse < 1e-8 * y.size * scale

    def test_constant_history_constant_forecast(self):
        params = holt_winters_fit(np.full(100, 2.5), m=12)
        np.testing.assert_array_equal(holt_winters_forecast(params, 5), np.full(5, 2.5))
        assert params.alpha == params.beta == params.gamma == 0.0

    def test_history_too_short(self):
        with pytest.raises(HistoryTooShort):
            holt_winters_fit(np.ones(2 * 48 - 1), m=48)

    def test_forecast_zero_trend_zero_seasonal(self):
        p = HoltWintersParams(0.2, 0.1, 0.1, m=4, level=7.0, trend=0.0,
                              seasonal=np.zeros(4), n_obs=20)
        np.testing.assert_array_equal(holt_winters_forecast(p, 3), [7.0, 7.0, 7.0])

    def test_forecast_trend_recurrence(self):
        # level 0, trend 1: h-step-ahead forecast is h+1
        p = HoltWintersParams(0.2, 0.1, 0.1, m=4, level=0.0, trend=1.0,
                              seasonal=np.zeros(4), n_obs=20)
        np.testing.assert_array_equal(holt_winters_forecast(p, 3), [1.0, 2.0, 3.0])

    def test_forecast_repeats_seasonal_pattern(self):
        seasonal = np.array([1.0, -1.0, 0.5, -0.5])
        p = HoltWintersParams(0.2, 0.1, 0.1, m=4, level=0.0, trend=0.0,
                              seasonal=seasonal, n_obs=8)
        out = holt_winters_forecast(p, 8)
        np.testing.assert_array_equal(out, np.tile(seasonal, 2))

    def test_seasonal_normalized_to_zero_sum(self):
        rng = np.random.default_rng(3)
        t = np.arange(8 * 24, dtype=float)
        y = 2 + np.sin(2 * np.pi * t / 24) + 0.05 * rng.normal(size=t.size)
        params = holt_winters_fit(y, 24)
        assert abs(params.seasonal.sum()) < 1e-6 * 24 * max(1.0, np.abs(y).max())

    def test_shift_equivariance_within_tolerance(self):
        rng = np.random.default_rng(4)
        t = np.arange(6 * 24, dtype=float)
        y = 2 + np.sin(2 * np.pi * t / 24) + 0.05 * rng.normal(size=t.size)
        base = holt_winters_forecast(holt_winters_fit(y, 24), 24)
        shifted = holt_winters_forecast(holt_winters_fit(y + 100.0, 24), 24)
        scale = np.abs(y).max() + 100
        np.testing.assert_allclose(shifted, base + 100.0, atol=1e-4 * scale)


class TestArima:
    def test_white_noise_small_phi(self):
        # Monte-Carlo oracle over a seed battery
        for seed in range(5):
            rng = np.random.default_rng(seed)
            y = rng.normal(0, 1, 2000)
            model = arima_fit(y, (1, 0, 0))
            assert abs(model.phi[0]) < 0.15

    def test_ar1_simulate_and_recover(self):
        rng = np.random.default_rng(42)
        n = 2000
        y = np.zeros(n)
        for t in range(1, n):
            y[t] = 0.8 * y[t - 1] + rng.normal()
        model = arima_fit(y, (1, 0, 0))
        assert 0.7 <= model.phi[0] <= 0.9

    def test_history_too_short(self):
        with pytest.raises(HistoryTooShort):
            arima_fit(np.ones(10), (3, 1, 2))

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            arima_fit(np.ones(1000), (11, 0, 0))
        with pytest.raises(ValueError):
            arima_fit(np.ones(1000), (1, 3, 0))

    def test_random_walk_flat_forecast(self):
        rng = np.random.default_rng(1)
        y = np.cumsum(rng.normal(0, 1, 300)) + 50
        model = arima_fit(y, (0, 1, 0))
        out = arima_forecast(model, y, 5)
        np.testing.assert_allclose(out, np.full(5, y[-1]), rtol=1e-12)

    def test_mean_model_forecasts_mean(self):
        rng = np.random.default_rng(2)
        y = rng.normal(7.0, 0.5, 100)
        model = arima_fit(y, (0, 0, 0))
        out = arima_forecast(model, y, 4)
        np.testing.assert_allclose(out, np.full(4, y.mean()), rtol=1e-12)

    def test_ar1_forecast_recursion_by_hand(self):
        # phi=0.5, mu=0, last deviation 4 -> [2, 1, 0.5]
        model = ArimaParams(p=1, d=0, q=0, phi=np.array([0.5]), intercept=0.0)
        history = np.array([0.0, 0.0, 4.0])
        out = arima_forecast(model, history, 3)
        np.testing.assert_allclose(out, [2.0, 1.0, 0.5], rtol=1e-12)

    def test_ma1_recovery(self):
        rng = np.random.default_rng(9)
        n = 2000
        eps = rng.normal(0, 1, n + 1)
        y = eps[1:] + 0.6 * eps[:-1]
        model = arima_fit(y, (0, 0, 1))
        assert abs(model.theta[0] - 0.6) < 0.1

    def test_choose_differencing(self):
        rng = np.random.default_rng(3)
        stationary = rng.normal(0, 1, 500)
        walk = np.cumsum(rng.normal(0, 1, 500))
        assert choose_differencing(stationary) == 0
        assert choose_differencing(walk) == 1


class TestMstl:
    def _signal(self, n=1344):
        t = np.arange(n, dtype=float)
        trend = 5.0 + 0.002 * t
        s48 = 0.8 * np.sin(2 * np.pi * t / 48)
        s336 = 0.4 * np.sin(2 * np.pi * t / 336)
        return t, trend, s48, s336

    def test_component_recovery_correlation(self):
        t, trend, s48, s336 = self._signal()
        decomp = mstl_decompose(trend + s48 + s336, periods=(48, 336))
        assert np.corrcoef(decomp.trend, trend)[0, 1] > 0.99
        assert np.corrcoef(decomp.seasonals[48], s48)[0, 1] > 0.99
        assert np.corrcoef(decomp.seasonals[336], s336)[0, 1] > 0.99

    def test_constant_input(self):
        decomp = mstl_decompose(np.full(250, 3.0), periods=(4, 12))
        np.testing.assert_allclose(decomp.trend, 3.0, atol=1e-9)
        np.testing.assert_allclose(decomp.seasonals[4], 0.0, atol=1e-9)
        np.testing.assert_allclose(decomp.remainder, 0.0, atol=1e-9)

    def test_reconstruction_identity_random_input(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(0, 5, 700)
        decomp = mstl_decompose(x, periods=(48, 336))
        recon = decomp.trend + decomp.seasonals[48] + decomp.seasonals[336] + decomp.remainder
        np.testing.assert_allclose(recon, x, rtol=1e-9, atol=1e-9)

    def test_history_too_short(self):
        with pytest.raises(HistoryTooShort):
            mstl_decompose(np.ones(500), periods=(48, 336))

    def test_periods_must_be_sorted(self):
        with pytest.raises(ValueError):
            mstl_decompose(np.ones(700), periods=(336, 48))

    def test_forecast_periodic_continuation(self):
        t = np.arange(480, dtype=float)
        y = 2.0 + np.sin(2 * np.pi * t / 48)
        decomp = mstl_decompose(y, periods=(48,))
        out = mstl_forecast(decomp, 96)
        truth = 2.0 + np.sin(2 * np.pi * np.arange(480, 576) / 48)
        np.testing.assert_allclose(out, truth, atol=0.05)

    def test_forecast_linear_trend_within_two_percent(self):
        n, h = 1344, 48
        t = np.arange(n, dtype=float)
        y = 1.0 + 0.01 * t
        decomp = mstl_decompose(y, periods=(48, 336))
        out = mstl_forecast(decomp, h)
        truth = 1.0 + 0.01 * (n + np.arange(h))
        assert abs(out[-1] - truth[-1]) / truth[-1] < 0.02

    def test_forecast_horizon_zero(self):
        decomp = mstl_decompose(np.ones(250), periods=(4,))
        assert mstl_forecast(decomp, 0).size == 0

    def test_roster_wrapper_drops_unfit_periods(self):
        model = MstlForecaster(periods=(48, 336))
        t = np.arange(336, dtype=float)
        out = model.forecast(2.0 + np.sin(2 * np.pi * t / 48), 24)
        assert out.shape == (24,)
        with pytest.raises(HistoryTooShort):
            model.forecast(np.ones(90), 5)
