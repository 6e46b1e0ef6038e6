"""Model contracts.

Two kinds of model participate in the benchmark:

* ``Forecaster`` — given a clean history, produces exactly ``horizon``
  finite values. Forecasters are run through the bidirectional
  forward/backward prediction pipeline.
* ``DirectImputer`` — consumes both edges of a gap at once and returns
  exactly ``gap.length`` finite values, bypassing the pipeline.
"""

from __future__ import annotations

import numpy as np

from ..series import Gap, MeterSeries


class Forecaster:
    """Horizon forecaster. Subclasses set ``name``/``category`` and implement
    ``forecast``; ``min_history`` is the shortest usable history length."""

    name: str = "forecaster"
    category: str = "baseline"
    deterministic: bool = True
    min_history: int = 1

    def forecast(self, history: np.ndarray, horizon: int) -> np.ndarray:
        raise NotImplementedError

    def fit_diagnostics(self, history: np.ndarray) -> dict:
        """Fitted-parameter dump for the verbose diagnostic CSV."""
        return {}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class DirectImputer:
    """Whole-gap imputer operating on the masked series."""

    name: str = "imputer"
    category: str = "baseline"
    deterministic: bool = True

    def impute(self, series: MeterSeries, gap: Gap) -> np.ndarray:
        raise NotImplementedError

    def impute_diagnostics(self, series: MeterSeries, gap: Gap) -> dict:
        return {}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def check_horizon(horizon: int) -> None:
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
