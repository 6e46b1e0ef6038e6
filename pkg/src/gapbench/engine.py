"""The bidirectional imputation pipeline and the benchmark run loop.

For a forecaster and a gap of length L:

1. forward prediction (FP): forecast L steps from the 7-day context left of
   the gap;
2. backward prediction (BP): forecast L steps from the time-reversed
   context right of the gap, then reverse the forecast so index i lines up
   with gap position i;
3. blend the two with weights that fade linearly from the FP end to the
   BP end.

Direct imputers (linear interpolation, Kalman smoothing) skip the pipeline
and fill the gap from both sides at once. Any model failure is captured as
a FAILED cell; it never aborts the run.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GapbenchError, LengthMismatch, NonFiniteInput
from .gaps import MaskedDataset
from .metrics import MetricSet, score_gap
from .models.base import DirectImputer, Forecaster
from .series import (
    DEFAULT_CONTEXT_LEN,
    Gap,
    MeterSeries,
    Window,
    extract_left_context,
    extract_right_context,
    reverse,
)

STATUS_OK = "OK"


@dataclass(frozen=True)
class ImputationResult:
    meter_id: str
    gap: Gap
    model_name: str
    run_index: int
    imputed: np.ndarray | None
    fp: np.ndarray | None
    bp_reversed: np.ndarray | None
    status: str

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def interpolate(fp: np.ndarray, bp_reversed: np.ndarray) -> np.ndarray:
    """Linear cross-fade between the forward and backward predictions.

    Weights move from pure FP at the first gap position to pure BP at the
    last; a length-1 gap takes the midpoint. Computed in the
    endpoint-exact blend form and clamped to the [FP, BP] envelope so the
    endpoint identities and convexity hold exactly in floating point.
    """
    fp = np.asarray(fp, dtype=np.float64)
    bp_reversed = np.asarray(bp_reversed, dtype=np.float64)
    if fp.shape != bp_reversed.shape or fp.ndim != 1 or fp.size == 0:
        raise LengthMismatch(f"fp and bp shapes differ: {fp.shape} vs {bp_reversed.shape}")
    if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(bp_reversed))):
        raise NonFiniteInput("fp and bp must be finite")
    L = fp.size
    if L == 1:
        return np.array([0.5 * (fp[0] + bp_reversed[0])])
    w = np.arange(L, dtype=np.float64) / (L - 1)
    blended = fp * (1.0 - w) + bp_reversed * w
    lo = np.minimum(fp, bp_reversed)
    hi = np.maximum(fp, bp_reversed)
    return np.clip(blended, lo, hi)


def forward_predict(
    forecaster: Forecaster,
    series: MeterSeries,
    gap: Gap,
    context_len: int = DEFAULT_CONTEXT_LEN,
) -> np.ndarray:
    left = extract_left_context(series, gap, context_len)
    return np.asarray(forecaster.forecast(left.values, gap.length), dtype=np.float64)


def backward_predict(
    forecaster: Forecaster,
    series: MeterSeries,
    gap: Gap,
    context_len: int = DEFAULT_CONTEXT_LEN,
) -> np.ndarray:
    right = extract_right_context(series, gap, context_len)
    backward = np.asarray(
        forecaster.forecast(reverse(right).values, gap.length), dtype=np.float64
    )
    return backward[::-1].copy()


def _validate_forecast(values: np.ndarray, horizon: int, side: str) -> None:
    if values.shape != (horizon,):
        raise LengthMismatch(f"{side} forecast returned {values.shape}, expected ({horizon},)")
    if not np.all(np.isfinite(values)):
        raise NonFiniteInput(f"{side} forecast contains non-finite values")


def impute_gap(
    model,
    dataset: MaskedDataset,
    meter_id: str,
    gap: Gap,
    run_index: int = 0,
    context_len: int = DEFAULT_CONTEXT_LEN,
) -> ImputationResult:
    """Run one (model, gap) cell; failures land in the status, not as raises."""
    series = dataset.series[meter_id]
    fp = bp = imputed = None
    try:
        if isinstance(model, DirectImputer):
            imputed = np.asarray(model.impute(series, gap), dtype=np.float64)
            _validate_forecast(imputed, gap.length, "imputer")
        else:
            fp = forward_predict(model, series, gap, context_len)
            _validate_forecast(fp, gap.length, "forward")
            bp = backward_predict(model, series, gap, context_len)
            _validate_forecast(bp, gap.length, "backward")
            imputed = interpolate(fp, bp)
        status = STATUS_OK
    except GapbenchError as exc:
        status = f"FAILED({type(exc).__name__}: {exc})"
        imputed = None
    except Exception as exc:  # model bug: still only this cell fails
        status = f"FAILED({type(exc).__name__}: {exc})"
        imputed = None
    return ImputationResult(
        meter_id=meter_id,
        gap=gap,
        model_name=model.name,
        run_index=run_index,
        imputed=imputed,
        fp=fp,
        bp_reversed=bp,
        status=status,
    )


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------


def run_benchmark(
    dataset: MaskedDataset,
    models: list,
    runs: int = 1,
    jobs: int = 1,
    context_len: int = DEFAULT_CONTEXT_LEN,
    dedupe_deterministic: bool = True,
    progress=None,
) -> list[ImputationResult]:
    """Impute every (model, meter, gap, run) cell.

    Deterministic models are computed once per gap and fanned out across
    run indices when ``dedupe_deterministic`` is set. Tasks sharing one
    external adapter serialize on its internal lock; everything else runs
    freely on the pool. Results come back sorted regardless of scheduling.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    cells = [
        (model, meter_id, gap)
        for model in models
        for meter_id in sorted(dataset.plan.gaps)
        for gap in dataset.plan.gaps[meter_id]
    ]

    results: list[ImputationResult] = []
    lock = threading.Lock()

    def work(cell):
        model, meter_id, gap = cell
        if model.deterministic and dedupe_deterministic:
            base = impute_gap(model, dataset, meter_id, gap, 0, context_len)
            produced = [
                ImputationResult(
                    meter_id=base.meter_id, gap=base.gap, model_name=base.model_name,
                    run_index=run, imputed=base.imputed, fp=base.fp,
                    bp_reversed=base.bp_reversed, status=base.status,
                )
                for run in range(runs)
            ]
        else:
            produced = [
                impute_gap(model, dataset, meter_id, gap, run, context_len)
                for run in range(runs)
            ]
        with lock:
            results.extend(produced)
        if progress is not None:
            progress(cell)

    if jobs <= 1:
        for cell in cells:
            work(cell)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, cells))

    results.sort(key=lambda r: (r.model_name, r.meter_id, r.gap.start_index, r.run_index))
    return results


def score_results(
    dataset: MaskedDataset, results: list[ImputationResult]
) -> list[tuple[ImputationResult, MetricSet | None]]:
    scored = []
    for res in results:
        if res.ok:
            truth = dataset.truth_for(res.meter_id, res.gap)
            scored.append((res, score_gap(truth, res.imputed)))
        else:
            scored.append((res, None))
    return scored


# ---------------------------------------------------------------------------
# Results artifact
# ---------------------------------------------------------------------------

RESULTS_HEADER = "meter_id,gap_start,gap_len,model,run,status,index,truth,imputed"


def write_results_csv(dataset: MaskedDataset, results: list[ImputationResult], path: Path) -> None:
    """One row per imputed point, plus a single row for failed cells."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for res in results:
            prefix = (
                f"{res.meter_id},{res.gap.start_index},{res.gap.length},"
                f"{res.model_name},{res.run_index},{_csv_quote(res.status)}"
            )
            if not res.ok:
                fh.write(prefix + ",,,\n")
                continue
            truth = dataset.truth_for(res.meter_id, res.gap)
            for i in range(res.gap.length):
                fh.write(f"{prefix},{i},{float(truth[i])!r},{float(res.imputed[i])!r}\n")


def _csv_quote(field: str) -> str:
    if "," in field or '"' in field:
        return '"' + field.replace('"', '""') + '"'
    return field


def read_results_csv(path: Path):
    """Parse a results artifact back into (cell key -> truth/imputed arrays).

    Returns a dict keyed (model, meter_id, gap_start, gap_len, run) with
    values (status, truth array | None, imputed array | None).
    """
    import csv as _csv

    cells: dict[tuple, tuple[str, list, list]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = _csv.DictReader(fh)
        for row in reader:
            key = (
                row["model"],
                row["meter_id"],
                int(row["gap_start"]),
                int(row["gap_len"]),
                int(row["run"]),
            )
            status, truth, imputed = cells.setdefault(key, (row["status"], [], []))
            if row["index"]:
                truth.append(float(row["truth"]))
                imputed.append(float(row["imputed"]))
    out = {}
    for key, (status, truth, imputed) in cells.items():
        if status == STATUS_OK:
            out[key] = (status, np.asarray(truth), np.asarray(imputed))
        else:
            out[key] = (status, None, None)
    return out


def write_diagnostics_csv(
    dataset: MaskedDataset, models: list, path: Path, context_len: int = DEFAULT_CONTEXT_LEN
) -> None:
    """Fitted-parameter dump per (model, gap); written under --verbose."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("meter_id,gap_start,model,param,value\n")
        for model in models:
            for meter_id in sorted(dataset.plan.gaps):
                series = dataset.series[meter_id]
                for gap in dataset.plan.gaps[meter_id]:
                    try:
                        if isinstance(model, DirectImputer):
                            diag = model.impute_diagnostics(series, gap)
                        else:
                            left = extract_left_context(series, gap, context_len)
                            diag = model.fit_diagnostics(left.values)
                    except Exception:
                        continue
                    for param in sorted(diag):
                        fh.write(
                            f"{meter_id},{gap.start_index},{model.name},{param},{diag[param]!r}\n"
                        )
