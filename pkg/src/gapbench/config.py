"""Run configuration: a single TOML file describing data source, experiment
design, the model roster, and adapters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # py3.10
    import tomli as tomllib

from .adapter import AdapterSpec
from .errors import ConfigError
from .ingest import (
    DEFAULT_ID_COLUMN,
    DEFAULT_TIME_COLUMN,
    DEFAULT_VALUE_COLUMN,
    IngestConfig,
)
from .synthetic import SyntheticSpec

DEFAULT_METERS = 10
DEFAULT_RUNS = 5
DEFAULT_SEED = 0


@dataclass(frozen=True)
class AnonymizeSettings:
    enabled: bool = False
    k: int = 3
    before_sampling: bool = True


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    runs: int = DEFAULT_RUNS
    meters: int = DEFAULT_METERS
    gaps_per_meter: int = 10
    max_gap_len: int = 48
    context_len: int = 336
    out_dir: Path = Path("out")
    jobs: int | None = None
    dedupe_deterministic: bool = True
    csv: IngestConfig | None = None
    synthetic: SyntheticSpec | None = None
    anonymize: AnonymizeSettings = field(default_factory=AnonymizeSettings)
    models: tuple[tuple[str, dict], ...] = ()  # empty roster -> all native models
    adapters: tuple[AdapterSpec, ...] = ()
    raw: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name, value in (
            ("runs", self.runs),
            ("meters", self.meters),
            ("max_gap_len", self.max_gap_len),
            ("context_len", self.context_len),
        ):
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if self.gaps_per_meter < 0:
            raise ConfigError("gaps_per_meter must be >= 0")
        if (self.csv is None) == (self.synthetic is None):
            raise ConfigError("exactly one of data.csv / data.synthetic is required")

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True, default=str).encode("utf-8")
        ).hexdigest()


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return parse_config(doc, base_dir=path.parent)


def parse_config(doc: dict, base_dir: Path = Path(".")) -> RunConfig:
    run = _section(doc, "run")
    data = _section(doc, "data")
    anon = _section(doc, "anonymize")

    seed = int(run.get("seed", DEFAULT_SEED))

    csv_cfg = None
    synth_cfg = None
    if "csv" in data:
        c = data["csv"]
        try:
            csv_cfg = IngestConfig(
                path=base_dir / c["path"],
                id_column=c.get("id_column", DEFAULT_ID_COLUMN),
                time_column=c.get("time_column", DEFAULT_TIME_COLUMN),
                value_column=c.get("value_column", DEFAULT_VALUE_COLUMN),
                expected_step=timedelta(minutes=float(c.get("step_minutes", 30))),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad [data.csv] section: {exc}") from None
    if "synthetic" in data:
        s = data["synthetic"]
        try:
            synth_cfg = SyntheticSpec(
                n_meters=int(s.get("n_meters", 10)),
                n_points=int(s.get("n_points", 17_520)),
                base_level=float(s.get("base_level", 2.0)),
                daily_amplitude=float(s.get("daily_amplitude", 1.0)),
                weekly_amplitude=float(s.get("weekly_amplitude", 0.5)),
                trend_slope=float(s.get("trend_slope", 0.0)),
                noise_sd=float(s.get("noise_sd", 0.1)),
                seed=int(s.get("seed", seed)),
            )
        except ValueError as exc:
            raise ConfigError(f"bad [data.synthetic] section: {exc}") from None

    models = []
    for i, entry in enumerate(doc.get("models", [])):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"models[{i}] needs a name")
        params = {k: v for k, v in entry.items() if k != "name"}
        models.append((str(entry["name"]), params))

    adapters = []
    for i, entry in enumerate(doc.get("adapters", [])):
        try:
            adapters.append(
                AdapterSpec(
                    name=str(entry["name"]),
                    command=tuple(str(c) for c in entry["command"]),
                    timeout_s=float(entry.get("timeout_s", 30.0)),
                    max_retries=int(entry.get("max_retries", 2)),
                    deterministic=bool(entry.get("deterministic", True)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad adapters[{i}] entry: {exc}") from None

    try:
        anonymize = AnonymizeSettings(
            enabled=bool(anon.get("enabled", False)),
            k=int(anon.get("k", 3)),
            before_sampling=bool(anon.get("before_sampling", True)),
        )
        return RunConfig(
            seed=seed,
            runs=int(run.get("runs", DEFAULT_RUNS)),
            meters=int(run.get("meters", DEFAULT_METERS)),
            gaps_per_meter=int(run.get("gaps_per_meter", 10)),
            max_gap_len=int(run.get("max_gap_len", 48)),
            context_len=int(run.get("context_len", 336)),
            out_dir=base_dir / run.get("out_dir", "out"),
            jobs=int(run["jobs"]) if "jobs" in run else None,
            dedupe_deterministic=bool(run.get("dedupe_deterministic", True)),
            csv=csv_cfg,
            synthetic=synth_cfg,
            anonymize=anonymize,
            models=tuple(models),
            adapters=tuple(adapters),
            raw=doc,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
