"""Aggregation across gaps, runs, and households, and report emission.

Aggregation law: gap-level metric values are averaged within each
(meter, run), the run means are averaged per meter, and the resulting one
value per household is summarized as mean and population SD across
households. Failed cells are excluded from the averages and counted.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyInput
from .metrics import METRIC_NAMES, MetricSet
from .models import CATEGORY_ORDER, category_of

AGGREGATION_NOTE = (
    "aggregation: gaps -> runs -> households; SD is population SD across households"
)


@dataclass(frozen=True)
class ScoredCell:
    model: str
    category: str
    meter_id: str
    gap_start: int
    run: int
    metrics: MetricSet | None  # None marks a FAILED cell


@dataclass(frozen=True)
class ModelRow:
    model: str
    category: str
    means: dict[str, float]
    sds: dict[str, float]
    failures: int
    n_households: int
    all_failed: bool = False


@dataclass(frozen=True)
class AggregateReport:
    rows: list[ModelRow]
    run_count: int
    household_count: int
    note: str = AGGREGATION_NOTE


def _population_sd(values: list[float], mean: float) -> float:
    if not values:
        return 0.0
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def aggregate(cells: list[ScoredCell], run_count: int | None = None) -> AggregateReport:
    if not cells:
        raise EmptyInput("no scored cells to aggregate")
    models = sorted({c.model for c in cells})
    meters = sorted({c.meter_id for c in cells})
    runs = sorted({c.run for c in cells})

    rows = []
    for model in models:
        mine = [c for c in cells if c.model == model]
        category = mine[0].category
        failures = sum(1 for c in mine if c.metrics is None)
        household_values: dict[str, dict[str, float]] = {}
        for meter in meters:
            run_means: dict[str, list[float]] = {name: [] for name in METRIC_NAMES}
            for run in runs:
                cell_metrics = [
                    c.metrics
                    for c in mine
                    if c.meter_id == meter and c.run == run and c.metrics is not None
                ]
                if not cell_metrics:
                    continue
                for name in METRIC_NAMES:
                    run_means[name].append(
                        sum(m.get(name) for m in cell_metrics) / len(cell_metrics)
                    )
            if run_means[METRIC_NAMES[0]]:
                household_values[meter] = {
                    name: sum(vals) / len(vals) for name, vals in run_means.items()
                }
        if not household_values:
            rows.append(
                ModelRow(
                    model=model, category=category, means={}, sds={},
                    failures=failures, n_households=0, all_failed=True,
                )
            )
            continue
        means = {}
        sds = {}
        for name in METRIC_NAMES:
            per_household = [household_values[m][name] for m in sorted(household_values)]
            mean = sum(per_household) / len(per_household)
            means[name] = mean
            sds[name] = _population_sd(per_household, mean)
        rows.append(
            ModelRow(
                model=model, category=category, means=means, sds=sds,
                failures=failures, n_households=len(household_values),
            )
        )
    return AggregateReport(
        rows=rows,
        run_count=run_count if run_count is not None else len(runs),
        household_count=len(meters),
    )


def scored_cells_from_results(dataset, scored) -> list[ScoredCell]:
    """Adapt (ImputationResult, MetricSet|None) pairs to aggregation input."""
    return [
        ScoredCell(
            model=res.model_name,
            category=category_of(res.model_name),
            meter_id=res.meter_id,
            gap_start=res.gap.start_index,
            run=res.run_index,
            metrics=metrics,
        )
        for res, metrics in scored
    ]


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

MACHINE_CSV = "report.csv"
HUMAN_TABLE = "report.md"
PLOT_CSV = "plot_mae_sd.csv"


def emit_report(report: AggregateReport, out_dir: Path) -> dict[str, Path]:
    """Write the machine CSV, the human table, and the plot-data CSV."""
    if not report.rows:
        raise EmptyInput("empty report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "machine": out_dir / MACHINE_CSV,
        "human": out_dir / HUMAN_TABLE,
        "plot": out_dir / PLOT_CSV,
    }
    _write_machine_csv(report, paths["machine"])
    _write_human_table(report, paths["human"])
    _write_plot_csv(report, paths["plot"])
    return paths


def _write_machine_csv(report: AggregateReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("model,category,metric,mean,sd,failures\n")
        for row in sorted(report.rows, key=lambda r: r.model):
            for metric in METRIC_NAMES:
                if row.all_failed:
                    fh.write(f"{row.model},{row.category},{metric},,,{row.failures}\n")
                else:
                    fh.write(
                        f"{row.model},{row.category},{metric},"
                        f"{row.means[metric]!r},{row.sds[metric]!r},{row.failures}\n"
                    )


def parse_machine_csv(path: Path) -> dict[tuple[str, str], tuple[float, float, int]]:
    """(model, metric) -> (mean, sd, failures); all-failed rows are skipped."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["mean"] == "":
                continue
            out[(row["model"], row["metric"])] = (
                float(row["mean"]),
                float(row["sd"]),
                int(row["failures"]),
            )
    return out


def _extreme_models(rows: list[ModelRow], metric: str, best: bool) -> set[str]:
    scored = [r for r in rows if not r.all_failed]
    if not scored:
        return set()
    pick = min if best else max
    target = pick(r.means[metric] for r in scored)
    return {r.model for r in scored if r.means[metric] == target}


def _write_human_table(report: AggregateReport, path: Path) -> None:
    rows = report.rows
    overall_best = {m: _extreme_models(rows, m, best=True) for m in METRIC_NAMES}
    overall_worst = {m: _extreme_models(rows, m, best=False) for m in METRIC_NAMES}

    lines = ["# Imputation benchmark report", ""]
    lines.append(f"- {report.note}")
    lines.append(f"- households: {report.household_count}, runs: {report.run_count}")
    lines.append(
        "- markers: [BEST]/[WORST] overall, [CAT-BEST]/[CAT-WORST] within the category; "
        "ties are all marked"
    )
    lines.append("")
    for category in CATEGORY_ORDER:
        cat_rows = [r for r in rows if r.category == category]
        if not cat_rows:
            continue
        cat_best = {m: _extreme_models(cat_rows, m, best=True) for m in METRIC_NAMES}
        cat_worst = {m: _extreme_models(cat_rows, m, best=False) for m in METRIC_NAMES}
        lines.append(f"## {category.capitalize()}")
        lines.append("")
        header = "| Model | " + " | ".join(n.upper() for n in METRIC_NAMES) + " | Failures |"
        lines.append(header)
        lines.append("|" + "---|" * (len(METRIC_NAMES) + 2))
        for row in sorted(cat_rows, key=lambda r: r.model):
            if row.all_failed:
                cells = ["ALL FAILED"] * len(METRIC_NAMES)
            else:
                cells = []
                for metric in METRIC_NAMES:
                    cell = f"{row.means[metric]:.4f} ({row.sds[metric]:.4f})"
                    marks = []
                    if row.model in overall_best[metric]:
                        marks.append("[BEST]" if len(overall_best[metric]) == 1 else "[BEST tie]")
                    elif row.model in cat_best[metric]:
                        marks.append(
                            "[CAT-BEST]" if len(cat_best[metric]) == 1 else "[CAT-BEST tie]"
                        )
                    if row.model in overall_worst[metric]:
                        marks.append("[WORST]" if len(overall_worst[metric]) == 1 else "[WORST tie]")
                    elif row.model in cat_worst[metric]:
                        marks.append(
                            "[CAT-WORST]" if len(cat_worst[metric]) == 1 else "[CAT-WORST tie]"
                        )
                    if marks:
                        cell += " " + " ".join(marks)
                    cells.append(cell)
            lines.append(f"| {row.model} | " + " | ".join(cells) + f" | {row.failures} |")
        lines.append("")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))


def _write_plot_csv(report: AggregateReport, path: Path) -> None:
    """Best/worst model per category by MAE, with mean and SD (figure data)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("category,model,role,mae_mean,mae_sd\n")
        for category in CATEGORY_ORDER:
            cat_rows = [r for r in report.rows if r.category == category and not r.all_failed]
            if not cat_rows:
                continue
            for role, best in (("best", True), ("worst", False)):
                for model in sorted(_extreme_models(cat_rows, "mae", best)):
                    row = next(r for r in cat_rows if r.model == model)
                    fh.write(
                        f"{category},{model},{role},{row.means['mae']!r},{row.sds['mae']!r}\n"
                    )
