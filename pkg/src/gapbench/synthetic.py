"""Synthetic half-hourly consumption generator for self-contained runs.

value(t) = max(0, base + slope*t + A_d*sin(2*pi*t/48) + A_w*sin(2*pi*t/336) + noise)

Each meter gets its own seeded substream, so the set of meters is
reproducible independent of generation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .series import HALF_HOUR, MeterSeries, SamplingSpec

DAY_PERIOD = 48
WEEK_PERIOD = 336

#: One year of half-hour steps.
YEAR_POINTS = 17_520

_START = datetime(2013, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SyntheticSpec:
    n_meters: int = 10
    n_points: int = YEAR_POINTS
    base_level: float = 2.0
    daily_amplitude: float = 1.0
    weekly_amplitude: float = 0.5
    trend_slope: float = 0.0
    noise_sd: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_meters < 1 or self.n_points < 1:
            raise ValueError("n_meters and n_points must be >= 1")
        if min(self.daily_amplitude, self.weekly_amplitude, self.noise_sd) < 0:
            raise ValueError("amplitudes and noise sd must be >= 0")


def synthesize(spec: SyntheticSpec) -> dict[str, MeterSeries]:
    t = np.arange(spec.n_points, dtype=np.float64)
    deterministic = (
        spec.base_level
        + spec.trend_slope * t
        + spec.daily_amplitude * np.sin(2.0 * np.pi * t / DAY_PERIOD)
        + spec.weekly_amplitude * np.sin(2.0 * np.pi * t / WEEK_PERIOD)
    )
    sampling = SamplingSpec(start_time=_START, step=HALF_HOUR, n_points=spec.n_points)
    out: dict[str, MeterSeries] = {}
    for i in range(spec.n_meters):
        rng = np.random.default_rng([spec.seed, i])
        noise = rng.normal(0.0, spec.noise_sd, spec.n_points) if spec.noise_sd > 0 else 0.0
        values = np.maximum(0.0, deterministic + noise)
        meter_id = f"synth-{i:03d}"
        out[meter_id] = MeterSeries(meter_id, sampling, values, np.zeros(spec.n_points, dtype=bool))
    return out
