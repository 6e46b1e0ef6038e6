"""Core data model: regularly sampled meter series, gaps, and context windows.

A series is a dense float array on a fixed UTC grid plus a parallel boolean
missing-mask. Missing is an explicit state, distinct from 0.0 kWh (household
consumption legitimately hits zero). All types are immutable after
construction and safe to share across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import InsufficientContext

#: One week of half-hour steps; the default forecasting context length.
DEFAULT_CONTEXT_LEN = 336

#: Canonical sampling step.
HALF_HOUR = timedelta(minutes=30)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SamplingSpec:
    """Regular UTC sampling grid: timestamp of index i is start + i*step."""

    start_time: datetime
    step: timedelta = HALF_HOUR
    n_points: int = 0

    def __post_init__(self):
        if self.step <= timedelta(0):
            raise ValueError("step must be positive")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.start_time.tzinfo is None:
            object.__setattr__(
                self, "start_time", self.start_time.replace(tzinfo=timezone.utc)
            )

    def time_of(self, index: int) -> datetime:
        return self.start_time + index * self.step

    def index_of(self, ts: datetime) -> int:
        """Exact inverse of time_of; raises for off-grid timestamps."""
        delta = ts - self.start_time
        q, r = divmod(delta, self.step)
        if r != timedelta(0):
            raise ValueError(f"timestamp {ts} is not on the sampling grid")
        return q


@dataclass(frozen=True)
class MeterSeries:
    """One meter's consumption values (kWh) with an explicit missing-mask.

    ``values[i]`` is only meaningful where ``missing[i]`` is False; present
    values are finite and non-negative.
    """

    meter_id: str
    sampling: SamplingSpec
    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        missing = np.asarray(self.missing, dtype=bool)
        if values.shape != (self.sampling.n_points,):
            raise ValueError("values length must equal sampling.n_points")
        if missing.shape != values.shape:
            raise ValueError("missing mask must match values shape")
        present = values[~missing]
        if present.size and (not np.all(np.isfinite(present)) or np.any(present < 0)):
            raise ValueError("present values must be finite and non-negative")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "missing", _frozen(missing))

    def __len__(self) -> int:
        return self.sampling.n_points

    @property
    def n_present(self) -> int:
        return int(np.count_nonzero(~self.missing))

    def present_values(self) -> np.ndarray:
        return self.values[~self.missing]

    def with_values(self, values: np.ndarray, missing: np.ndarray) -> "MeterSeries":
        return MeterSeries(self.meter_id, self.sampling, values, missing)


@dataclass(frozen=True)
class Gap:
    """A contiguous masked interval: ``length`` points starting at ``start_index``."""

    start_index: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("gap length must be >= 1")
        if self.start_index < 0:
            raise ValueError("gap start_index must be >= 0")

    @property
    def end_index(self) -> int:
        """First index after the gap."""
        return self.start_index + self.length


@dataclass(frozen=True)
class Window:
    """A contiguous, fully observed slice of a parent series."""

    values: np.ndarray
    origin_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size == 0:
            raise ValueError("window must be non-empty")
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self) -> int:
        return self.values.size


def check_gap_in_series(series: MeterSeries, gap: Gap) -> None:
    if gap.end_index > len(series):
        raise ValueError(
            f"gap [{gap.start_index}, {gap.end_index}) exceeds series length {len(series)}"
        )


def extract_left_context(
    series: MeterSeries, gap: Gap, context_len: int = DEFAULT_CONTEXT_LEN
) -> Window:
    """The ``context_len`` clean points immediately preceding the gap."""
    check_gap_in_series(series, gap)
    lo = gap.start_index - context_len
    if lo < 0:
        raise InsufficientContext(
            f"need {context_len} points before index {gap.start_index}, have {gap.start_index}"
        )
    if np.any(series.missing[lo : gap.start_index]):
        raise InsufficientContext(
            f"left context [{lo}, {gap.start_index}) contains missing points"
        )
    return Window(series.values[lo : gap.start_index], origin_index=lo)


def extract_right_context(
    series: MeterSeries, gap: Gap, context_len: int = DEFAULT_CONTEXT_LEN
) -> Window:
    """The ``context_len`` clean points immediately following the gap."""
    check_gap_in_series(series, gap)
    lo = gap.end_index
    hi = lo + context_len
    if hi > len(series):
        raise InsufficientContext(
            f"need {context_len} points after index {lo}, have {len(series) - lo}"
        )
    if np.any(series.missing[lo:hi]):
        raise InsufficientContext(f"right context [{lo}, {hi}) contains missing points")
    return Window(series.values[lo:hi], origin_index=lo)


def reverse(window: Window) -> Window:
    """Time-reverse a window; an involution."""
    return Window(window.values[::-1], origin_index=window.origin_index)
