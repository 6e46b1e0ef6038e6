from datetime import datetime, timezone

import numpy as np
import pytest

from gapbench.series import MeterSeries, SamplingSpec

START = datetime(2013, 1, 1, tzinfo=timezone.utc)


def make_series(values, missing=None, meter_id="m0"):
    values = np.asarray(values, dtype=np.float64)
    if missing is None:
        missing = np.zeros(values.size, dtype=bool)
    sampling = SamplingSpec(start_time=START, n_points=values.size)
    return MeterSeries(meter_id, sampling, values, np.asarray(missing, dtype=bool))


@pytest.fixture
def series_1000():
    rng = np.random.default_rng(42)
    return make_series(rng.uniform(0.5, 2.0, 1000))
