"""Seeded artificial-gap injection with withheld ground truth.

Plans are drawn from counter-based RNG streams keyed by (master seed,
meter id), so a meter's gaps do not depend on how many other meters exist
or in what order they are visited. Gap lengths are uniform on
{1..max_gap_len}; start positions are uniform over the feasible set via
rejection sampling. Feasibility keeps every gap a full context away from
the series edges, from pre-existing missing data, and from other gaps, so
every forward/backward context stays clean.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasiblePlan, ParseError, PlanMismatch, PreexistingMissing
from .series import DEFAULT_CONTEXT_LEN, Gap, MeterSeries

DEFAULT_GAPS_PER_METER = 10
DEFAULT_MAX_GAP_LEN = 48
DEFAULT_MAX_ATTEMPTS = 10_000

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GapPlan:
    seed: int
    gaps_per_meter: int
    max_gap_len: int
    context_len: int
    gaps: dict[str, tuple[Gap, ...]]

    def total_gaps(self) -> int:
        return sum(len(v) for v in self.gaps.values())


@dataclass(frozen=True)
class MaskedDataset:
    """Masked series plus the withheld originals, keyed by (meter id, gap)."""

    series: dict[str, MeterSeries]
    ground_truth: dict[tuple[str, Gap], np.ndarray]
    plan: GapPlan

    def truth_for(self, meter_id: str, gap: Gap) -> np.ndarray:
        return self.ground_truth[(meter_id, gap)]


def meter_stream(seed: int, meter_id: str) -> np.random.Generator:
    """Philox stream keyed by the master seed and a stable hash of the id."""
    digest = hashlib.sha256(meter_id.encode("utf-8")).digest()
    meter_key = int.from_bytes(digest[:8], "little")
    key = np.array([seed & _MASK64, meter_key], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_gap_length(rng: np.random.Generator, max_gap_len: int) -> int:
    return int(rng.integers(1, max_gap_len + 1))


def _feasible(start, length, context_len, n, missing, placed) -> bool:
    if start < context_len or start + length + context_len > n:
        return False
    if missing[start - context_len : start + length + context_len].any():
        return False
    for g in placed:
        if not (start >= g.end_index + context_len or g.start_index >= start + length + context_len):
            return False
    return True


def generate_plan(
    series_by_id: dict[str, MeterSeries],
    gaps_per_meter: int = DEFAULT_GAPS_PER_METER,
    max_gap_len: int = DEFAULT_MAX_GAP_LEN,
    context_len: int = DEFAULT_CONTEXT_LEN,
    seed: int = 0,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> GapPlan:
    if gaps_per_meter < 0:
        raise ValueError("gaps_per_meter must be >= 0")
    if max_gap_len < 1:
        raise ValueError("max_gap_len must be >= 1")
    plan_gaps: dict[str, tuple[Gap, ...]] = {}
    for meter_id in sorted(series_by_id):
        series = series_by_id[meter_id]
        n = len(series)
        rng = meter_stream(seed, meter_id)
        placed: list[Gap] = []
        attempts = 0
        for _ in range(gaps_per_meter):
            length = draw_gap_length(rng, max_gap_len)
            lo, hi = context_len, n - length - context_len
            while True:
                attempts += 1
                if attempts > max_attempts:
                    raise InfeasiblePlan(
                        f"meter {meter_id}: no feasible placement after {max_attempts} attempts "
                        f"({len(placed)}/{gaps_per_meter} gaps placed)"
                    )
                if hi < lo:
                    continue
                start = int(rng.integers(lo, hi + 1))
                if _feasible(start, length, context_len, n, series.missing, placed):
                    placed.append(Gap(start, length))
                    break
        plan_gaps[meter_id] = tuple(sorted(placed, key=lambda g: g.start_index))
    return GapPlan(
        seed=seed,
        gaps_per_meter=gaps_per_meter,
        max_gap_len=max_gap_len,
        context_len=context_len,
        gaps=plan_gaps,
    )


def apply_plan(series_by_id: dict[str, MeterSeries], plan: GapPlan) -> MaskedDataset:
    unknown = set(plan.gaps) - set(series_by_id)
    if unknown:
        raise PlanMismatch(f"plan references unknown meters: {sorted(unknown)}")
    masked: dict[str, MeterSeries] = dict(series_by_id)
    truth: dict[tuple[str, Gap], np.ndarray] = {}
    for meter_id, gaps in plan.gaps.items():
        series = series_by_id[meter_id]
        values = np.array(series.values)
        missing = np.array(series.missing)
        for gap in gaps:
            if gap.end_index > len(series):
                raise PlanMismatch(
                    f"meter {meter_id}: gap [{gap.start_index}, {gap.end_index}) "
                    f"exceeds series length {len(series)}"
                )
            if missing[gap.start_index : gap.end_index].any():
                raise PreexistingMissing(
                    f"meter {meter_id}: gap at {gap.start_index} overlaps missing data"
                )
            truth[(meter_id, gap)] = np.array(values[gap.start_index : gap.end_index])
            values[gap.start_index : gap.end_index] = np.nan
            missing[gap.start_index : gap.end_index] = True
        masked[meter_id] = series.with_values(values, missing)
    return MaskedDataset(series=masked, ground_truth=truth, plan=plan)


def unmask(dataset: MaskedDataset) -> dict[str, MeterSeries]:
    """Restore the withheld truth; inverse of apply_plan."""
    restored: dict[str, MeterSeries] = dict(dataset.series)
    for meter_id, gaps in dataset.plan.gaps.items():
        series = restored[meter_id]
        values = np.array(series.values)
        missing = np.array(series.missing)
        for gap in gaps:
            values[gap.start_index : gap.end_index] = dataset.truth_for(meter_id, gap)
            missing[gap.start_index : gap.end_index] = False
        restored[meter_id] = series.with_values(values, missing)
    return restored


# ---------------------------------------------------------------------------
# Manifest (audit/replay surface)
# ---------------------------------------------------------------------------

_MANIFEST_PREFIX = "# gapbench-plan"


def write_plan_manifest(plan: GapPlan, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{_MANIFEST_PREFIX} seed={plan.seed} gaps_per_meter={plan.gaps_per_meter} "
            f"max_gap_len={plan.max_gap_len} context_len={plan.context_len}\n"
        )
        fh.write("meter_id,start_index,length\n")
        for meter_id in sorted(plan.gaps):
            for gap in plan.gaps[meter_id]:
                fh.write(f"{meter_id},{gap.start_index},{gap.length}\n")


def read_plan_manifest(path: Path) -> GapPlan:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith(_MANIFEST_PREFIX):
            raise ParseError(f"not a plan manifest: {header!r}", line=1)
        params = dict(
            part.split("=", 1) for part in header[len(_MANIFEST_PREFIX) :].split()
        )
        columns = fh.readline().strip()
        if columns != "meter_id,start_index,length":
            raise ParseError(f"unexpected manifest columns {columns!r}", line=2)
        gaps: dict[str, list[Gap]] = {}
        for line_no, line in enumerate(fh, start=3):
            line = line.strip()
            if not line:
                continue
            try:
                meter_id, start, length = line.split(",")
                gaps.setdefault(meter_id, []).append(Gap(int(start), int(length)))
            except ValueError as exc:
                raise ParseError(f"bad manifest row {line!r}: {exc}", line=line_no) from None
    return GapPlan(
        seed=int(params["seed"]),
        gaps_per_meter=int(params["gaps_per_meter"]),
        max_gap_len=int(params["max_gap_len"]),
        context_len=int(params["context_len"]),
        gaps={m: tuple(g) for m, g in gaps.items()},
    )
