"""The five per-gap error metrics.

Conventions for zero consumption: MAPE skips points with |truth| < 1e-8
(skips are counted, and MAPE is 0 when every point is skipped); SMAPE uses
the 2|e|/(|truth|+|imputed|) form bounded by 2, with 0/0 terms defined
as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NonFiniteInput

MAPE_THRESHOLD = 1e-8

METRIC_NAMES = ("mae", "mape", "mse", "rmse", "smape")


@dataclass(frozen=True)
class MetricSet:
    mae: float
    mape: float
    mse: float
    rmse: float
    smape: float
    n_scored: int
    n_skipped_mape: int

    def get(self, name: str) -> float:
        return getattr(self, name)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def score_gap(truth: np.ndarray, imputed: np.ndarray) -> MetricSet:
    truth = np.asarray(truth, dtype=np.float64)
    imputed = np.asarray(imputed, dtype=np.float64)
    if truth.shape != imputed.shape or truth.ndim != 1 or truth.size == 0:
        raise LengthMismatch(
            f"truth and imputed must be equal-length 1-d arrays, got {truth.shape} vs {imputed.shape}"
        )
    if not (np.all(np.isfinite(truth)) and np.all(np.isfinite(imputed))):
        raise NonFiniteInput("metrics need finite truth and imputed values")

    err = imputed - truth
    abs_err = np.abs(err)
    mae = float(abs_err.mean())
    mse = float((err * err).mean())
    rmse = math.sqrt(mse)

    scored = np.abs(truth) >= MAPE_THRESHOLD
    n_skipped = int(truth.size - scored.sum())
    mape = float((abs_err[scored] / np.abs(truth[scored])).mean()) if scored.any() else 0.0

    denom = np.abs(truth) + np.abs(imputed)
    smape_terms = np.zeros_like(denom)
    nz = denom > 0
    smape_terms[nz] = 2.0 * abs_err[nz] / denom[nz]
    smape = float(smape_terms.mean())

    return MetricSet(
        mae=mae, mape=mape, mse=mse, rmse=rmse, smape=smape,
        n_scored=int(truth.size), n_skipped_mape=n_skipped,
    )
