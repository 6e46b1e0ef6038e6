"""Univariate microaggregation.

Present values are sorted by magnitude, partitioned into consecutive
clusters of k (the last cluster absorbs the remainder, so its size is in
[k, 2k-1]), and each value is replaced by its cluster mean before returning
to its original time position. Missing entries are untouched and the
per-series mean of present values is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewValues
from .series import MeterSeries

DEFAULT_K = 3


@dataclass(frozen=True)
class AnonymizeConfig:
    k: int = DEFAULT_K

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("cluster size k must be >= 2")


def microaggregate(series: MeterSeries, config: AnonymizeConfig) -> MeterSeries:
    present_idx = np.flatnonzero(~series.missing)
    n = present_idx.size
    if n < config.k:
        raise TooFewValues(f"microaggregation with k={config.k} needs >= {config.k} present values, have {n}")

    present = series.values[present_idx]
    order = np.argsort(present, kind="stable")
    sorted_vals = present[order]

    k = config.k
    n_clusters = n // k  # final cluster takes the remainder: size in [k, 2k-1]
    out_sorted = np.empty(n)
    for c in range(n_clusters):
        lo = c * k
        hi = (c + 1) * k if c < n_clusters - 1 else n
        out_sorted[lo:hi] = sorted_vals[lo:hi].mean()

    anonymized = np.array(series.values)
    anonymized[present_idx[order]] = out_sorted
    return series.with_values(anonymized, series.missing)


def microaggregate_all(
    series_by_id: dict[str, MeterSeries], config: AnonymizeConfig
) -> dict[str, MeterSeries]:
    """Per-meter anonymization; meters never pool values."""
    return {mid: microaggregate(s, config) for mid, s in series_by_id.items()}
