"""k-nearest-neighbour forecaster on lag embeddings.

Training rows are all (w consecutive values, next value) pairs from the
history; prediction is the unweighted mean of the k nearest targets under
Euclidean distance, applied recursively for multi-step horizons. Distance
ties break toward the chronologically earlier training row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import HistoryTooShort
from .base import Forecaster, check_horizon

DEFAULT_K = 5
DEFAULT_WINDOW = 48


@dataclass(frozen=True)
class KnnModel:
    k: int
    w: int
    inputs: np.ndarray   # (rows, w) lag vectors, chronological order
    targets: np.ndarray  # (rows,) next values

    def __post_init__(self):
        if self.k < 1 or self.w < 1:
            raise ValueError("k and w must be >= 1")
        if self.inputs.shape[0] < self.k:
            raise ValueError("fewer training rows than k")


def knn_fit(history: np.ndarray, k: int = DEFAULT_K, w: int = DEFAULT_WINDOW) -> KnnModel:
    history = np.asarray(history, dtype=np.float64)
    if k < 1 or w < 1:
        raise ValueError("k and w must be >= 1")
    if history.size < w + k:
        raise HistoryTooShort(
            f"knn(k={k}, w={w}) needs {w + k} points, history has {history.size}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(history, w)
    inputs = np.ascontiguousarray(windows[:-1])
    targets = history[w:].copy()
    return KnnModel(k=k, w=w, inputs=inputs, targets=targets)


def knn_forecast(model: KnnModel, history: np.ndarray, horizon: int) -> np.ndarray:
    """Recursive multi-step forecast, feeding predictions back into the query."""
    history = np.asarray(history, dtype=np.float64)
    check_horizon(horizon)
    if history.size < model.w:
        raise HistoryTooShort(f"need {model.w} points to form a query")
    buf = list(history[-model.w :])
    out = np.empty(horizon)
    for h in range(horizon):
        query = np.asarray(buf[-model.w :])
        d2 = ((model.inputs - query) ** 2).sum(axis=1)
        order = np.argsort(d2, kind="stable")  # ties -> lower row index
        out[h] = model.targets[order[: model.k]].mean()
        buf.append(out[h])
    return out


class KnnForecaster(Forecaster):
    name = "knn"
    category = "ml"

    def __init__(self, k: int = DEFAULT_K, w: int = DEFAULT_WINDOW):
        self.k = k
        self.w = w
        self.min_history = w + k

    def forecast(self, history, horizon):
        return knn_forecast(knn_fit(history, self.k, self.w), history, horizon)
