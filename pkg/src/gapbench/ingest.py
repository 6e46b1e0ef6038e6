"""CSV ingestion onto the regular half-hourly grid, and the matching emitter.

Input convention follows the public London household export: one row per
(meter, timestamp) with an ISO-8601 timestamp column and a kWh value column.
Rows are snapped to the sampling grid (±1 s jitter tolerance); grid slots
with no row, or with an empty/"Null" value, become missing. Present values
round-trip bit-exactly through ``write_csv`` -> ``ingest_csv``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import DuplicateError, GridError, ParseError
from .series import HALF_HOUR, MeterSeries, SamplingSpec

#: London export column names, the documented default mapping.
DEFAULT_ID_COLUMN = "LCLid"
DEFAULT_TIME_COLUMN = "DateTime"
DEFAULT_VALUE_COLUMN = "KWH/hh (per half hour)"

GRID_TOLERANCE = timedelta(seconds=1)

_MISSING_TOKENS = {"", "null", "nan", "na"}


@dataclass(frozen=True)
class IngestConfig:
    path: Path
    id_column: str = DEFAULT_ID_COLUMN
    time_column: str = DEFAULT_TIME_COLUMN
    value_column: str = DEFAULT_VALUE_COLUMN
    expected_step: timedelta = HALF_HOUR

    def __post_init__(self):
        cols = (self.id_column, self.time_column, self.value_column)
        if len(set(cols)) != len(cols):
            raise ValueError("column names must be distinct")
        if self.expected_step <= timedelta(0):
            raise ValueError("expected_step must be positive")
        object.__setattr__(self, "path", Path(self.path))


def _parse_timestamp(raw: str, line: int) -> datetime:
    try:
        ts = datetime.fromisoformat(raw.strip())
    except ValueError as exc:
        raise ParseError(f"bad timestamp {raw!r}: {exc}", line=line) from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _snap_to_grid(ts: datetime, origin: datetime, step: timedelta) -> int:
    delta = ts - origin
    steps = round(delta / step)
    snapped = origin + steps * step
    if abs(ts - snapped) > GRID_TOLERANCE:
        raise GridError(f"timestamp {ts.isoformat()} is {abs(ts - snapped)} off the {step} grid")
    return steps


def ingest_csv(config: IngestConfig) -> dict[str, MeterSeries]:
    """Load one series per distinct meter id, keyed by meter id.

    Each meter's grid spans its own first..last observed timestamp; grid
    slots without a (present) row become missing. Duplicate
    (meter, timestamp) rows and off-grid timestamps are errors.
    """
    step = config.expected_step
    rows: dict[str, dict[datetime, float | None]] = {}
    with open(config.path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file, header row required")
        for col in (config.id_column, config.time_column, config.value_column):
            if col not in reader.fieldnames:
                raise ParseError(f"missing column {col!r} in header {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            meter = (row[config.id_column] or "").strip()
            if not meter:
                raise ParseError("empty meter id", line=line)
            ts = _parse_timestamp(row[config.time_column] or "", line)
            raw_value = (row[config.value_column] or "").strip()
            if raw_value.lower() in _MISSING_TOKENS:
                value = None
            else:
                try:
                    value = float(raw_value)
                except ValueError:
                    raise ParseError(f"bad kWh value {raw_value!r}", line=line) from None
                if not np.isfinite(value) or value < 0:
                    raise ParseError(f"kWh value {raw_value!r} not finite and non-negative", line=line)
            per_meter = rows.setdefault(meter, {})
            if ts in per_meter:
                raise DuplicateError(f"duplicate row for meter {meter} at {ts.isoformat()}")
            per_meter[ts] = value

    out: dict[str, MeterSeries] = {}
    for meter, stamped in rows.items():
        times = sorted(stamped)
        origin = times[0]
        # snap every timestamp, then size the grid from the last one
        indices = {}
        for ts in times:
            indices[ts] = _snap_to_grid(ts, origin, step)
        n_points = max(indices.values()) + 1
        values = np.zeros(n_points)
        missing = np.ones(n_points, dtype=bool)
        for ts, idx in indices.items():
            value = stamped[ts]
            if value is not None:
                values[idx] = value
                missing[idx] = False
        sampling = SamplingSpec(start_time=origin, step=step, n_points=n_points)
        out[meter] = MeterSeries(meter, sampling, values, missing)
    return out


def write_csv(
    series_by_id: dict[str, MeterSeries],
    path: Path,
    id_column: str = DEFAULT_ID_COLUMN,
    time_column: str = DEFAULT_TIME_COLUMN,
    value_column: str = DEFAULT_VALUE_COLUMN,
) -> None:
    """Emit series in the ingestible format; missing slots get empty values.

    Floats are written with repr (shortest round-trip form) so present
    values survive a write/ingest cycle bit-exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([id_column, time_column, value_column])
        for meter_id in sorted(series_by_id):
            series = series_by_id[meter_id]
            for i in range(len(series)):
                ts = series.sampling.time_of(i).isoformat()
                if series.missing[i]:
                    writer.writerow([meter_id, ts, ""])
                else:
                    writer.writerow([meter_id, ts, repr(float(series.values[i]))])
