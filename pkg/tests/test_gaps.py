import numpy as np
import pytest

from gapbench.errors import InfeasiblePlan, ParseError, PlanMismatch, PreexistingMissing
from gapbench.gaps import (
    apply_plan,
    draw_gap_length,
    generate_plan,
    meter_stream,
    read_plan_manifest,
    unmask,
    write_plan_manifest,
)
from gapbench.series import Gap
from gapbench.synthetic import SyntheticSpec, synthesize

from conftest import make_series


@pytest.fixture(scope="module")
def year_series():
    return synthesize(SyntheticSpec(n_meters=2, n_points=17_520, seed=11))


class TestGeneratePlan:
    def test_paper_protocol_defaults(self, year_series):
        plan = generate_plan(year_series, gaps_per_meter=10, max_gap_len=48,
                             context_len=336, seed=3)
        for meter_id, gaps in plan.gaps.items():
            assert len(gaps) == 10
            for g in gaps:
                assert 1 <= g.length <= 48
        assert plan.total_gaps() == 20

    def test_zero_gaps(self, year_series):
        plan = generate_plan(year_series, gaps_per_meter=0, seed=1)
        assert plan.total_gaps() == 0

    def test_same_seed_identical(self, year_series):
        a = generate_plan(year_series, seed=5)
        b = generate_plan(year_series, seed=5)
        assert a == b

    def test_different_seed_differs(self, year_series):
        a = generate_plan(year_series, seed=5)
        b = generate_plan(year_series, seed=6)
        assert a != b

    def test_plan_independent_of_other_meters(self, year_series):
        both = generate_plan(year_series, seed=9)
        one_id = sorted(year_series)[0]
        solo = generate_plan({one_id: year_series[one_id]}, seed=9)
        assert solo.gaps[one_id] == both.gaps[one_id]

    def test_separation_and_context_constraints(self, year_series):
        context_len = 336
        plan = generate_plan(year_series, context_len=context_len, seed=7)
        for meter_id, gaps in plan.gaps.items():
            n = len(year_series[meter_id])
            ordered = sorted(gaps, key=lambda g: g.start_index)
            for g in ordered:
                assert g.start_index >= context_len
                assert g.end_index + context_len <= n
            for a, b in zip(ordered, ordered[1:]):
                assert b.start_index - a.end_index >= context_len

    def test_avoids_preexisting_missing(self):
        missing = np.zeros(4000, dtype=bool)
        missing[2000:2010] = True
        series = {"m": make_series(np.ones(4000), missing, meter_id="m")}
        plan = generate_plan(series, gaps_per_meter=3, max_gap_len=10,
                             context_len=100, seed=2)
        for g in plan.gaps["m"]:
            lo, hi = g.start_index - 100, g.end_index + 100
            assert not missing[lo:hi].any()

    def test_infeasible_plan(self):
        series = {"m": make_series(np.ones(500), meter_id="m")}
        with pytest.raises(InfeasiblePlan):
            generate_plan(series, gaps_per_meter=10, max_gap_len=48,
                          context_len=336, seed=0)

    def test_length_distribution_uniform(self):
        # oracle: the same draw routine the planner uses, over a long stream
        rng = meter_stream(123, "uniformity-probe")
        n_draws = 48_000
        counts = np.zeros(48, dtype=int)
        for _ in range(n_draws):
            counts[draw_gap_length(rng, 48) - 1] += 1
        expected = n_draws / 48
        assert counts.min() >= 0.8 * expected
        assert counts.max() <= 1.2 * expected

    def test_plan_lengths_span_range(self, year_series):
        plan = generate_plan(year_series, gaps_per_meter=10, seed=21)
        lengths = [g.length for gaps in plan.gaps.values() for g in gaps]
        assert min(lengths) >= 1 and max(lengths) <= 48
        assert len(set(lengths)) > 3


class TestApplyPlan:
    def test_single_gap_masks_and_preserves_truth(self):
        series = {"m": make_series(np.full(1000, 2.0), meter_id="m")}
        plan = generate_plan(series, gaps_per_meter=0, seed=0)
        plan.gaps["m"] = (Gap(10, 1),)
        masked = apply_plan(series, plan)
        assert bool(masked.series["m"].missing[10]) is True
        np.testing.assert_array_equal(masked.truth_for("m", Gap(10, 1)), [2.0])

    def test_unmask_roundtrip_bit_exact(self, year_series):
        plan = generate_plan(year_series, seed=4)
        masked = apply_plan(year_series, plan)
        restored = unmask(masked)
        for meter_id, original in year_series.items():
            assert np.array_equal(restored[meter_id].values, original.values)
            assert np.array_equal(restored[meter_id].missing, original.missing)

    def test_unknown_meter_rejected(self, year_series):
        plan = generate_plan(year_series, seed=4)
        gaps = dict(plan.gaps)
        gaps["nope"] = (Gap(500, 5),)
        bad = type(plan)(seed=plan.seed, gaps_per_meter=plan.gaps_per_meter,
                         max_gap_len=plan.max_gap_len, context_len=plan.context_len,
                         gaps=gaps)
        with pytest.raises(PlanMismatch):
            apply_plan(year_series, bad)

    def test_preexisting_missing_rejected(self):
        missing = np.zeros(100, dtype=bool)
        missing[50] = True
        series = {"m": make_series(np.ones(100), missing, meter_id="m")}
        plan = generate_plan(series, gaps_per_meter=0, seed=0)
        plan.gaps["m"] = (Gap(48, 5),)
        with pytest.raises(PreexistingMissing):
            apply_plan(series, plan)

    def test_unplanned_positions_identical(self, year_series):
        plan = generate_plan(year_series, seed=4)
        masked = apply_plan(year_series, plan)
        for meter_id, original in year_series.items():
            gap_mask = np.zeros(len(original), dtype=bool)
            for g in plan.gaps[meter_id]:
                gap_mask[g.start_index : g.end_index] = True
            assert np.array_equal(
                masked.series[meter_id].values[~gap_mask], original.values[~gap_mask]
            )


class TestManifest:
    def test_roundtrip(self, year_series, tmp_path):
        plan = generate_plan(year_series, seed=4)
        path = tmp_path / "plan.csv"
        write_plan_manifest(plan, path)
        assert read_plan_manifest(path) == plan

    def test_deterministic_bytes(self, year_series, tmp_path):
        plan = generate_plan(year_series, seed=4)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_plan_manifest(plan, p1)
        write_plan_manifest(plan, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("not a manifest\n", encoding="utf-8")
        with pytest.raises(ParseError):
            read_plan_manifest(path)
