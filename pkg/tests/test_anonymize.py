import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapbench.anonymize import AnonymizeConfig, microaggregate
from gapbench.errors import TooFewValues

from conftest import make_series


def test_constant_series_fixed_point():
    s = make_series([1.0, 1.0, 1.0, 1.0])
    out = microaggregate(s, AnonymizeConfig(k=2))
    np.testing.assert_array_equal(out.values, [1.0, 1.0, 1.0, 1.0])


def test_hand_evaluated_cluster_means():
    # sorted input: clusters {1,2} and {3,4} -> means 1.5 and 3.5
    s = make_series([1.0, 2.0, 3.0, 4.0])
    out = microaggregate(s, AnonymizeConfig(k=2))
    np.testing.assert_array_equal(out.values, [1.5, 1.5, 3.5, 3.5])


def test_unsorted_input_returns_to_time_positions():
    s = make_series([4.0, 1.0, 3.0, 2.0])
    out = microaggregate(s, AnonymizeConfig(k=2))
    # value-sorted clusters {1,2}, {3,4}; positions keep their cluster mean
    np.testing.assert_array_equal(out.values, [3.5, 1.5, 3.5, 1.5])


def test_too_few_values():
    s = make_series([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(TooFewValues):
        microaggregate(s, AnonymizeConfig(k=5))


def test_final_cluster_absorbs_remainder():
    # n=5, k=2 -> clusters of 2 and 3
    s = make_series([1.0, 2.0, 3.0, 4.0, 5.0])
    out = microaggregate(s, AnonymizeConfig(k=2))
    np.testing.assert_array_equal(out.values, [1.5, 1.5, 4.0, 4.0, 4.0])


def test_missing_entries_untouched():
    missing = np.array([False, True, False, False, False])
    s = make_series([1.0, np.nan, 2.0, 3.0, 4.0], missing)
    out = microaggregate(s, AnonymizeConfig(k=2))
    assert bool(out.missing[1]) is True
    np.testing.assert_array_equal(out.values[~missing], [1.5, 1.5, 3.5, 3.5])


def test_k_must_be_at_least_two():
    with pytest.raises(ValueError):
        AnonymizeConfig(k=1)


@given(
    st.lists(st.floats(0, 1e4), min_size=3, max_size=200),
    st.integers(2, 5),
)
def test_mean_preserved_and_order_statistics(values, k):
    if len(values) < k:
        values = values + [1.0] * (k - len(values))
    s = make_series(values)
    out = microaggregate(s, AnonymizeConfig(k=k))
    before = s.present_values().mean()
    after = out.present_values().mean()
    assert after == pytest.approx(before, rel=1e-9, abs=1e-12)
    # sorted outputs are non-decreasing cluster means
    sorted_out = np.sort(out.present_values())
    assert np.all(np.diff(sorted_out) >= -1e-12)


def test_idempotent_on_already_aggregated():
    s = make_series([1.0, 2.0, 3.0, 4.0])
    once = microaggregate(s, AnonymizeConfig(k=2))
    twice = microaggregate(once, AnonymizeConfig(k=2))
    np.testing.assert_array_equal(once.values, twice.values)
