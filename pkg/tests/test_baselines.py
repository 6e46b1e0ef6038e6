import numpy as np
import pytest

from gapbench.errors import EmptyHistory, HistoryTooShort, MissingEndpoint
from gapbench.models.baselines import (
    last_week_forecast,
    linear_interpolation_impute,
    padded_last_forecast,
    slp_forecast,
)
from gapbench.series import Gap

from conftest import make_series


class TestSlp:
    def test_exact_line_extrapolation(self):
        # closed-form OLS on [1,2,3,4]: slope 1, so the line continues 5, 6
        out = slp_forecast(np.array([1.0, 2.0, 3.0, 4.0]), 2, fit_window=4)
        np.testing.assert_allclose(out, [5.0, 6.0], rtol=1e-12)

    def test_constant_history(self):
        out = slp_forecast(np.full(10, 3.5), 4, fit_window=10)
        np.testing.assert_allclose(out, np.full(4, 3.5), rtol=1e-12)

    def test_fit_window_one_rejected(self):
        with pytest.raises(HistoryTooShort):
            slp_forecast(np.array([1.0, 2.0]), 1, fit_window=1)

    def test_history_shorter_than_window(self):
        with pytest.raises(HistoryTooShort):
            slp_forecast(np.array([1.0, 2.0]), 1, fit_window=5)

    def test_zero_error_on_linear_history(self):
        t = np.arange(100, dtype=float)
        hist = 2.0 + 0.25 * t
        out = slp_forecast(hist, 10, fit_window=48)
        np.testing.assert_allclose(out, 2.0 + 0.25 * np.arange(100, 110), rtol=1e-9)

    def test_shift_equivariance(self):
        rng = np.random.default_rng(0)
        hist = rng.uniform(0, 2, 60)
        base = slp_forecast(hist, 5, fit_window=48)
        shifted = slp_forecast(hist + 10.0, 5, fit_window=48)
        np.testing.assert_allclose(shifted, base + 10.0, rtol=1e-9, atol=1e-9)


class TestPaddedLast:
    def test_repeats_last(self):
        np.testing.assert_array_equal(
            padded_last_forecast(np.array([1.0, 7.0, 3.0]), 2), [3.0, 3.0]
        )

    def test_identity_on_singleton(self):
        np.testing.assert_array_equal(padded_last_forecast(np.array([4.2]), 1), [4.2])

    def test_empty_history(self):
        with pytest.raises(EmptyHistory):
            padded_last_forecast(np.array([]), 1)

    def test_shift_equivariance_exact(self):
        hist = np.array([0.5, 1.5, 2.0])
        assert padded_last_forecast(hist + 3.0, 2)[0] == padded_last_forecast(hist, 2)[0] + 3.0


class TestLastWeek:
    def test_small_period_formula(self):
        # output[i] = history[len - period + (i % period)]
        out = last_week_forecast(np.array([1.0, 2.0, 3.0, 4.0]), 3, period=2)
        np.testing.assert_array_equal(out, [3.0, 4.0, 3.0])

    def test_weekly_periodic_continuation(self):
        week = np.sin(2 * np.pi * np.arange(336) / 336) + 2
        hist = np.tile(week, 2)
        out = last_week_forecast(hist, 336, period=336)
        np.testing.assert_array_equal(out, week)

    def test_history_too_short(self):
        with pytest.raises(HistoryTooShort):
            last_week_forecast(np.ones(100), 5, period=336)

    def test_shift_equivariance_exact(self):
        hist = np.arange(8.0)
        np.testing.assert_array_equal(
            last_week_forecast(hist + 1.0, 4, period=4),
            last_week_forecast(hist, 4, period=4) + 1.0,
        )


class TestLinearInterpolation:
    def test_hand_evaluated(self):
        # left 0, right 3, L 2: 0 + 3*(i+1)/3 -> [1, 2]
        s = make_series([0.0, np.nan, np.nan, 3.0], [False, True, True, False])
        out = linear_interpolation_impute(s, Gap(1, 2))
        np.testing.assert_allclose(out, [1.0, 2.0], rtol=1e-12)

    def test_flat_segment(self):
        s = make_series([2.0, np.nan, np.nan, np.nan, 2.0], [False, True, True, True, False])
        out = linear_interpolation_impute(s, Gap(1, 3))
        np.testing.assert_allclose(out, [2.0, 2.0, 2.0])

    def test_gap_at_series_start(self):
        s = make_series([np.nan, 1.0, 2.0], [True, False, False])
        with pytest.raises(MissingEndpoint):
            linear_interpolation_impute(s, Gap(0, 1))

    def test_gap_at_series_end(self):
        s = make_series([1.0, 2.0, np.nan], [False, False, True])
        with pytest.raises(MissingEndpoint):
            linear_interpolation_impute(s, Gap(2, 1))

    def test_monotone_between_endpoints(self):
        s = make_series(
            [1.0] + [np.nan] * 5 + [4.0], [False] + [True] * 5 + [False]
        )
        out = linear_interpolation_impute(s, Gap(1, 5))
        assert np.all(np.diff(out) > 0)
        assert out.min() >= 1.0 and out.max() <= 4.0

    def test_shift_equivariance_exact(self):
        vals = [1.0, np.nan, 3.0]
        miss = [False, True, False]
        base = linear_interpolation_impute(make_series(vals, miss), Gap(1, 1))
        shifted = linear_interpolation_impute(
            make_series([2.0, np.nan, 4.0], miss), Gap(1, 1)
        )
        np.testing.assert_array_equal(shifted, base + 1.0)
