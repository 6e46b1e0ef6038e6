"""Command-line orchestrator.

Subcommands: ``run`` executes the whole benchmark from a TOML config;
``gapgen``/``ingest``/``anonymize``/``report`` expose the individual stages
on files for audit and replay. Exit codes: 0 success, 1 config error,
2 runtime error. ``GAPBENCH_OUT_DIR`` overrides the output directory (and
nothing else).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import timedelta
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .anonymize import AnonymizeConfig, microaggregate_all
from .config import RunConfig, load_config
from .adapter import AdapterForecaster
from .engine import (
    read_results_csv,
    run_benchmark,
    score_results,
    write_diagnostics_csv,
    write_results_csv,
)
from .errors import ConfigError, GapbenchError
from .gaps import apply_plan, generate_plan, write_plan_manifest
from .ingest import IngestConfig, ingest_csv, write_csv
from .metrics import score_gap
from .models import build_model, category_of, default_roster
from .report import ScoredCell, aggregate, emit_report, scored_cells_from_results
from .synthetic import synthesize

_METER_SAMPLE_TAG = 0x6D657465  # distinct stream: rosters can change, gaps stay


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (GapbenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gapbench")
    sub = parser.add_subparsers(required=True)

    p_run = sub.add_parser("run", help="execute a full benchmark run")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--out", type=Path, default=None)
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_gap = sub.add_parser("gapgen", help="generate and write a gap plan manifest")
    p_gap.add_argument("--config", required=True, type=Path)
    p_gap.add_argument("--out", required=True, type=Path)
    p_gap.set_defaults(func=cmd_gapgen)

    p_ing = sub.add_parser("ingest", help="normalize a consumption CSV onto the grid")
    _add_column_args(p_ing)
    p_ing.add_argument("--csv", required=True, type=Path)
    p_ing.add_argument("--out", required=True, type=Path)
    p_ing.set_defaults(func=cmd_ingest)

    p_anon = sub.add_parser("anonymize", help="microaggregate a consumption CSV")
    _add_column_args(p_anon)
    p_anon.add_argument("--csv", required=True, type=Path)
    p_anon.add_argument("--k", type=int, default=3)
    p_anon.add_argument("--out", required=True, type=Path)
    p_anon.set_defaults(func=cmd_anonymize)

    p_rep = sub.add_parser("report", help="re-aggregate a results CSV into reports")
    p_rep.add_argument("--results", required=True, type=Path)
    p_rep.add_argument("--out-dir", required=True, type=Path)
    p_rep.set_defaults(func=cmd_report)
    return parser


def _add_column_args(p):
    p.add_argument("--id-column", default=None)
    p.add_argument("--time-column", default=None)
    p.add_argument("--value-column", default=None)
    p.add_argument("--step-minutes", type=float, default=30.0)


def _ingest_config(args) -> IngestConfig:
    kwargs = {}
    if args.id_column:
        kwargs["id_column"] = args.id_column
    if args.time_column:
        kwargs["time_column"] = args.time_column
    if args.value_column:
        kwargs["value_column"] = args.value_column
    return IngestConfig(
        path=args.csv, expected_step=timedelta(minutes=args.step_minutes), **kwargs
    )


# ---------------------------------------------------------------------------
# Stage helpers shared by run and the subcommands
# ---------------------------------------------------------------------------


def load_series(cfg: RunConfig):
    if cfg.synthetic is not None:
        return synthesize(cfg.synthetic)
    return ingest_csv(cfg.csv)


def sample_meters(series_by_id, n: int, seed: int):
    """Seeded meter subset; the stream is independent of the gap streams."""
    ids = sorted(series_by_id)
    if len(ids) <= n:
        return dict(series_by_id)
    rng = np.random.default_rng([seed, _METER_SAMPLE_TAG])
    chosen = rng.choice(len(ids), size=n, replace=False)
    return {ids[i]: series_by_id[ids[i]] for i in sorted(chosen)}


def prepare_dataset(cfg: RunConfig):
    """ingest/synthesize -> anonymize (configurable order) -> sample -> plan."""
    series = load_series(cfg)
    anon = AnonymizeConfig(k=cfg.anonymize.k) if cfg.anonymize.enabled else None
    if anon is not None and cfg.anonymize.before_sampling:
        series = microaggregate_all(series, anon)
    series = sample_meters(series, cfg.meters, cfg.seed)
    if anon is not None and not cfg.anonymize.before_sampling:
        series = microaggregate_all(series, anon)
    plan = generate_plan(
        series,
        gaps_per_meter=cfg.gaps_per_meter,
        max_gap_len=cfg.max_gap_len,
        context_len=cfg.context_len,
        seed=cfg.seed,
    )
    return series, plan


def build_roster(cfg: RunConfig, step_s: int = 1800):
    if cfg.models:
        models = [build_model(name, params) for name, params in cfg.models]
    else:
        models = default_roster()
    models += [AdapterForecaster(spec, step_s=step_s) for spec in cfg.adapters]
    return models


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _resolve_out_dir(cfg: RunConfig, cli_out: Path | None) -> Path:
    env = os.environ.get("GAPBENCH_OUT_DIR")
    if env:
        return Path(env)
    if cli_out is not None:
        return cli_out
    return cfg.out_dir


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = _resolve_out_dir(cfg, args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs if args.jobs is not None else (cfg.jobs or os.cpu_count() or 1)

    series, plan = prepare_dataset(cfg)
    dataset = apply_plan(series, plan)
    models = build_roster(cfg)

    remaining = {m.name: plan.total_gaps() for m in models}

    def progress(cell):
        model = cell[0]
        remaining[model.name] -= 1
        if remaining[model.name] == 0:
            print(f"gapbench: model {model.name} done", file=sys.stderr)

    try:
        results = run_benchmark(
            dataset,
            models,
            runs=cfg.runs,
            jobs=jobs,
            context_len=cfg.context_len,
            dedupe_deterministic=cfg.dedupe_deterministic,
            progress=progress,
        )
        write_results_csv(dataset, results, out_dir / "results.csv")
        write_plan_manifest(plan, out_dir / "plan.csv")
        if args.verbose:
            write_diagnostics_csv(dataset, models, out_dir / "diagnostics.csv", cfg.context_len)
        scored = score_results(dataset, results)
        report = aggregate(scored_cells_from_results(dataset, scored), run_count=cfg.runs)
        emit_report(report, out_dir)
        _write_run_manifest(cfg, out_dir, models)
    finally:
        for model in models:
            if isinstance(model, AdapterForecaster):
                model.close()
    return 0


def _write_run_manifest(cfg: RunConfig, out_dir: Path, models) -> None:
    manifest = {
        "config_sha256": cfg.config_hash(),
        "seed": cfg.seed,
        "runs": cfg.runs,
        "meters": cfg.meters,
        "gaps_per_meter": cfg.gaps_per_meter,
        "max_gap_len": cfg.max_gap_len,
        "context_len": cfg.context_len,
        "models": [m.name for m in models],
        "package_version": __version__,
        "kernel_backend": _kernels.BACKEND,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_gapgen(args) -> int:
    cfg = load_config(args.config)
    _, plan = prepare_dataset(cfg)
    write_plan_manifest(plan, args.out)
    return 0


def cmd_ingest(args) -> int:
    series = ingest_csv(_ingest_config(args))
    write_csv(series, args.out)
    return 0


def cmd_anonymize(args) -> int:
    series = ingest_csv(_ingest_config(args))
    anonymized = microaggregate_all(series, AnonymizeConfig(k=args.k))
    write_csv(anonymized, args.out)
    return 0


def cmd_report(args) -> int:
    env = os.environ.get("GAPBENCH_OUT_DIR")
    out_dir = Path(env) if env else args.out_dir
    cells_raw = read_results_csv(args.results)
    cells = []
    runs = set()
    for (model, meter_id, gap_start, _gap_len, run), (status, truth, imputed) in sorted(
        cells_raw.items()
    ):
        runs.add(run)
        metrics = score_gap(truth, imputed) if status == "OK" else None
        cells.append(
            ScoredCell(
                model=model,
                category=category_of(model),
                meter_id=meter_id,
                gap_start=gap_start,
                run=run,
                metrics=metrics,
            )
        )
    report = aggregate(cells, run_count=len(runs))
    emit_report(report, out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
