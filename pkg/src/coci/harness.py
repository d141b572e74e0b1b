"""Experiment harness: config loading, trial batches, and result files.

A config is a single JSON file describing the application (best-arm, top-k,
osa, or water), the true parameters, the estimator, and the run settings.
Trials are embarrassingly parallel and individually seeded: trial i draws
its integer seed from the splittable sequence ``(master_seed, i)``, so
adding trials never perturbs earlier ones, and a record's seed column alone
reproduces its run. In ``both`` mode the adaptive and uniform samplers share
the trial seed, hence identical per-arm sample streams (paired comparison).

Result files: a records table (CSV or JSON lines) with columns
``trial, seed, mode, rounds, correct, xi_held, bound_value, bound_satisfied,
pulls_0..pulls_{m-1}, wall_ms`` and a separate single-object summary JSON.
Everything except the wall-clock column is bitwise reproducible.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .condition import BiMonotone, ConditionStrategy, CornerEnumeration, GridScan
from .core import ProblemInstance
from .engine import RunResult, run_coci, run_uniform
from .errors import CociError, ConfigError
from .estimators import EstimatorKind
from .hardness import WIDTH_TOP_K, HardnessReport, hardness_report
from .oracles import (
    LinearCost,
    PowerCost,
    QuadraticCost,
    WaterSpec,
    make_top_k_oracle,
    make_water_oracle,
)
from .osa import make_osa_oracle
from .sim import ArmModel, Bernoulli, DiscreteSupport, PointMass, ScaledBeta, build_instance

_APPLICATIONS = ("best-arm", "top-k", "osa", "water")
_MODES = ("coci", "uniform", "both")
_FORMATS = ("csv", "json-lines")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; see :func:`load_config`."""

    name: str
    application: str
    theta_star: tuple[float, ...]
    estimator: EstimatorKind
    delta: float
    mode: str
    trials: int
    master_seed: int
    strategy: Optional[str] = None  # None = auto
    k: Optional[int] = None
    n: Optional[tuple[int, ...]] = None
    water: Optional[WaterSpec] = None
    models: Optional[tuple[ArmModel, ...]] = None
    max_rounds: Optional[int] = None
    hardness_epsilon: Optional[float] = 0.01
    out_path: Optional[str] = None
    out_format: str = "csv"
    workers: int = 1


@dataclass(frozen=True)
class TrialRecord:
    """One run's row in the results table."""

    trial: int
    seed: int
    mode: str
    rounds: int
    correct: bool
    xi_held: bool
    bound_value: Optional[float]
    bound_satisfied: Optional[bool]
    pulls: tuple[int, ...]
    wall_ms: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: tuple[TrialRecord, ...]
    summary: dict
    hardness: Optional[HardnessReport]


def trial_seed(master_seed: int, trial: int) -> int:
    """Integer seed of a trial, from the splittable pair (master, trial)."""
    return int(np.random.SeedSequence((master_seed, trial)).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def _require(raw: dict, field: str, types, path: str):
    if field not in raw:
        raise ConfigError(f"{path}{field}", "missing required field")
    value = raw[field]
    if not isinstance(value, types):
        raise ConfigError(f"{path}{field}", f"expected {types}, got {type(value).__name__}")
    return value


_COST_KINDS = {
    "quadratic": lambda spec: QuadraticCost(float(spec.get("a", 1.0))),
    "power": lambda spec: PowerCost(float(spec.get("a", 1.0)), float(spec.get("p", 2.0))),
    "linear": lambda spec: LinearCost(float(spec.get("a", 0.0))),
}

_MODEL_KINDS = {
    "bernoulli": lambda spec: Bernoulli(float(spec["p"])),
    "point-mass": lambda spec: PointMass(float(spec["v"])),
    "discrete": lambda spec: DiscreteSupport(
        tuple(float(v) for v in spec["values"]),
        tuple(float(p) for p in spec["probabilities"]),
    ),
    "beta": lambda spec: ScaledBeta(float(spec["a"]), float(spec["b"])),
}


def parse_config(raw: dict, name: str = "config") -> ExperimentConfig:
    """Validate a raw config mapping into an :class:`ExperimentConfig`."""
    application = _require(raw, "application", str, "")
    if application not in _APPLICATIONS:
        raise ConfigError("application", f"must be one of {_APPLICATIONS}")
    theta = tuple(float(v) for v in _require(raw, "theta_star", list, ""))
    if not theta:
        raise ConfigError("theta_star", "must be a nonempty list")
    for i, v in enumerate(theta):
        if not (0.0 <= v <= 1.0):
            raise ConfigError(f"theta_star[{i}]", f"value {v} outside [0, 1]")

    est_name = raw.get("estimator", "mean")
    try:
        estimator = EstimatorKind[str(est_name).upper()]
    except KeyError:
        raise ConfigError("estimator", f"unknown estimator {est_name!r}") from None

    delta = float(_require(raw, "delta", (int, float), ""))
    if not (0.0 < delta < 1.0):
        raise ConfigError("delta", f"must be in (0, 1), got {delta}")

    mode = raw.get("mode", "coci")
    if mode not in _MODES:
        raise ConfigError("mode", f"must be one of {_MODES}")
    trials = int(raw.get("trials", 1))
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")
    master_seed = int(raw.get("master_seed", 0))

    strategy = raw.get("strategy")
    if strategy is not None:
        base = str(strategy).split(":", 1)[0]
        if base not in ("auto", "bi-monotone", "corner-enumeration", "grid-scan"):
            raise ConfigError("strategy", f"unknown strategy {strategy!r}")
        if base == "auto":
            strategy = None

    k = raw.get("k")
    n = raw.get("n")
    water = None
    if application == "top-k":
        if k is None:
            raise ConfigError("k", "top-k requires a subset size k")
        k = int(k)
        if not (1 <= k <= len(theta)):
            raise ConfigError("k", f"need 1 <= k <= {len(theta)}")
    elif application == "best-arm":
        k = 1
    elif application == "osa":
        if n is None or k is None:
            raise ConfigError("n", "osa requires group sizes n and budget k")
        n = tuple(int(v) for v in n)
        k = int(k)
        if len(n) != len(theta):
            raise ConfigError("n", "group sizes must match theta_star length")
        if any(v < 1 for v in n):
            raise ConfigError("n", "group sizes must be >= 1")
        if k < len(n):
            raise ConfigError("k", f"budget must be >= group count {len(n)}")
        if estimator is not EstimatorKind.VARIANCE:
            raise ConfigError("estimator", "osa estimates within-group variances")
    elif application == "water":
        wraw = _require(raw, "water", dict, "")
        costs = []
        for idx, cost in enumerate(_require(wraw, "costs", list, "water.")):
            kind = cost.get("kind") if isinstance(cost, dict) else None
            if kind not in _COST_KINDS:
                raise ConfigError(f"water.costs[{idx}]", f"unknown cost kind {kind!r}")
            costs.append(_COST_KINDS[kind](cost))
        try:
            water = WaterSpec(
                b=float(_require(wraw, "b", (int, float), "water.")),
                caps=tuple(float(c) for c in _require(wraw, "caps", list, "water.")),
                costs=tuple(costs),
                grid_step=float(_require(wraw, "grid_step", (int, float), "water.")),
            )
        except CociError as exc:
            raise ConfigError("water", str(exc)) from exc
        if water.m != len(theta):
            raise ConfigError("water.caps", "source count must match theta_star length")

    models: tuple[ArmModel, ...] | None = None
    if "arms" in raw:
        entries = _require(raw, "arms", list, "")
        if len(entries) != len(theta):
            raise ConfigError("arms", "need one arm model per parameter")
        parsed = []
        for idx, entry in enumerate(entries):
            kind = entry.get("kind") if isinstance(entry, dict) else None
            if kind not in _MODEL_KINDS:
                raise ConfigError(f"arms[{idx}].kind", f"unknown arm model {kind!r}")
            try:
                parsed.append(_MODEL_KINDS[kind](entry))
            except (CociError, KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"arms[{idx}]", str(exc)) from exc
        models = tuple(parsed)

    hardness_raw = raw.get("hardness", {})
    if hardness_raw is False:
        hardness_epsilon = None
    elif isinstance(hardness_raw, dict):
        hardness_epsilon = float(hardness_raw.get("epsilon", 0.01))
    else:
        raise ConfigError("hardness", "must be false or an object like {'epsilon': 0.01}")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output", "must be an object")
    out_format = output.get("format", "csv")
    if out_format not in _FORMATS:
        raise ConfigError("output.format", f"must be one of {_FORMATS}")

    max_rounds = raw.get("max_rounds")
    workers = int(raw.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers", "must be >= 1")

    return ExperimentConfig(
        name=str(raw.get("name", name)),
        application=application,
        theta_star=theta,
        estimator=estimator,
        delta=delta,
        mode=mode,
        trials=trials,
        master_seed=master_seed,
        strategy=strategy,
        k=k,
        n=n,
        water=water,
        models=models,
        max_rounds=int(max_rounds) if max_rounds is not None else None,
        hardness_epsilon=hardness_epsilon,
        out_path=output.get("path"),
        out_format=out_format,
        workers=workers,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a JSON config file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(str(path), "top-level config must be an object")
    return parse_config(raw, name=path.stem)


_UNIQUENESS_CHECK_LIMIT = 100_000


def build_problem(config: ExperimentConfig) -> ProblemInstance:
    """Instantiate the oracle and arm models described by a config.

    Degenerate parameter vectors (non-unique optimum) are rejected here when
    the decision class is small enough to enumerate.
    """
    if config.application in ("best-arm", "top-k"):
        oracle = make_top_k_oracle(len(config.theta_star), config.k or 1)
    elif config.application == "osa":
        oracle = make_osa_oracle(config.n, config.k)
    else:
        oracle = make_water_oracle(config.water)
    try:
        instance = build_instance(
            oracle,
            config.theta_star,
            config.estimator,
            models=config.models,
            name=config.name,
        )
    except CociError as exc:
        raise ConfigError("arms", str(exc)) from exc
    if oracle.decision_count is not None and oracle.decision_count <= _UNIQUENESS_CHECK_LIMIT:
        try:
            instance.check_unique_optimum()
        except CociError as exc:
            raise ConfigError("theta_star", str(exc)) from exc
    return instance


def resolve_strategy(config: ExperimentConfig) -> ConditionStrategy | None:
    """Map the config's strategy string to a strategy object (None = auto)."""
    if config.strategy is None:
        return None
    base, _, arg = config.strategy.partition(":")
    if base == "bi-monotone":
        return BiMonotone()
    if base == "corner-enumeration":
        return CornerEnumeration()
    if base == "grid-scan":
        return GridScan(int(arg) if arg else 21)
    return None


def config_width(config: ExperimentConfig) -> Optional[int]:
    return WIDTH_TOP_K if config.application in ("best-arm", "top-k") else None


# ---------------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------------


def _run_trial(args) -> list[TrialRecord]:
    (instance, delta, strategy, mode, trial, master_seed, max_rounds, h_lambda) = args
    seed = trial_seed(master_seed, trial)
    records = []
    modes = ("coci", "uniform") if mode == "both" else (mode,)
    for run_mode in modes:
        runner = run_coci if run_mode == "coci" else run_uniform
        start = time.perf_counter()
        result: RunResult = runner(
            instance,
            delta,
            strategy=strategy,
            seed=seed,
            max_rounds=max_rounds,
            h_lambda=h_lambda,
        )
        wall_ms = (time.perf_counter() - start) * 1e3
        records.append(
            TrialRecord(
                trial=trial,
                seed=seed,
                mode=run_mode,
                rounds=result.rounds,
                correct=bool(result.correct),
                xi_held=result.xi_held,
                bound_value=result.bound_value,
                bound_satisfied=result.bound_satisfied,
                pulls=result.per_arm_pulls,
                wall_ms=wall_ms,
            )
        )
    return records


def run_experiment(
    config: ExperimentConfig,
    workers: int | None = None,
) -> ExperimentResult:
    """Execute all trials of a config and aggregate the summary.

    Trials run in parallel when ``workers > 1``; records are reduced in
    trial order, so worker count does not affect the results.
    """
    instance = build_problem(config)
    strategy = resolve_strategy(config)
    workers = config.workers if workers is None else workers

    report: HardnessReport | None = None
    h_lambda: float | None = None
    if config.hardness_epsilon is not None:
        report = hardness_report(
            instance.oracle,
            config.theta_star,
            epsilon=config.hardness_epsilon,
            width=config_width(config),
            include_gaps=config.application in ("best-arm", "top-k"),
        )
        if math.isfinite(report.h_lambda):
            h_lambda = report.h_lambda

    tasks = [
        (
            instance,
            config.delta,
            strategy,
            config.mode,
            trial,
            config.master_seed,
            config.max_rounds,
            h_lambda,
        )
        for trial in range(config.trials)
    ]
    if workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            grouped = list(pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        grouped = [_run_trial(t) for t in tasks]

    records = tuple(rec for group in grouped for rec in group)
    records = tuple(sorted(records, key=lambda r: (r.trial, r.mode)))
    summary = summarize(config, records, report)
    return ExperimentResult(config=config, records=records, summary=summary, hardness=report)


def _mode_summary(records: Sequence[TrialRecord]) -> dict:
    rounds = [r.rounds for r in records]
    m = len(records[0].pulls)
    return {
        "trials": len(records),
        "error_rate": sum(not r.correct for r in records) / len(records),
        "mean_rounds": statistics.fmean(rounds),
        "median_rounds": statistics.median(rounds),
        "p95_rounds": float(np.percentile(rounds, 95)),
        "mean_pulls_per_arm": [
            statistics.fmean(r.pulls[i] for r in records) for i in range(m)
        ],
        "xi_frequency": sum(r.xi_held for r in records) / len(records),
        "bound_violations": sum(r.bound_satisfied is False for r in records),
    }


def summarize(
    config: ExperimentConfig,
    records: Sequence[TrialRecord],
    report: HardnessReport | None,
) -> dict:
    """Deterministic aggregate statistics over the trial records."""
    modes = sorted({r.mode for r in records})
    per_mode = {
        mode: _mode_summary([r for r in records if r.mode == mode]) for mode in modes
    }
    summary: dict[str, Any] = {
        "name": config.name,
        "application": config.application,
        "estimator": config.estimator.name.lower(),
        "delta": config.delta,
        "trials": config.trials,
        "master_seed": config.master_seed,
        "mode": config.mode,
        "modes": per_mode,
        "hardness": report.to_dict() if report is not None else None,
    }
    if "coci" in per_mode and "uniform" in per_mode:
        summary["paired_round_ratio"] = (
            per_mode["coci"]["mean_rounds"] / per_mode["uniform"]["mean_rounds"]
        )
    return summary


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------


def _record_fields(m: int) -> list[str]:
    return (
        ["trial", "seed", "mode", "rounds", "correct", "xi_held", "bound_value", "bound_satisfied"]
        + [f"pulls_{i}" for i in range(m)]
        + ["wall_ms"]
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def emit_results(
    records: Sequence[TrialRecord],
    summary: dict,
    out_dir: str | Path,
    fmt: str = "csv",
) -> list[Path]:
    """Write the records table and the summary file; returns written paths."""
    if not records:
        raise CociError("no records to emit")
    if fmt not in _FORMATS:
        raise CociError(f"unknown output format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    m = len(records[0].pulls)
    fields = _record_fields(m)
    written = []

    if fmt == "csv":
        path = out_dir / "records.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for r in records:
                row = [
                    r.trial,
                    r.seed,
                    r.mode,
                    r.rounds,
                    r.correct,
                    r.xi_held,
                    r.bound_value,
                    r.bound_satisfied,
                    *r.pulls,
                    r.wall_ms,
                ]
                writer.writerow([_cell(v) for v in row])
        written.append(path)
    else:
        path = out_dir / "records.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for r in records:
                obj = {
                    "trial": r.trial,
                    "seed": r.seed,
                    "mode": r.mode,
                    "rounds": r.rounds,
                    "correct": r.correct,
                    "xi_held": r.xi_held,
                    "bound_value": r.bound_value,
                    "bound_satisfied": r.bound_satisfied,
                }
                for i, p in enumerate(r.pulls):
                    obj[f"pulls_{i}"] = p
                obj["wall_ms"] = r.wall_ms
                fh.write(json.dumps(obj))
                fh.write("\n")
        written.append(path)

    summary_path = out_dir / "summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary_path)
    return written


def _parse_bool(cell: str) -> bool | None:
    if cell == "":
        return None
    if cell not in ("true", "false"):
        raise CociError(f"bad boolean cell {cell!r}")
    return cell == "true"


def parse_records_csv(path: str | Path) -> tuple[TrialRecord, ...]:
    """Inverse of the CSV emitter (round-trip safe)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        pull_cols = [h for h in header if h.startswith("pulls_")]
        records = []
        for row in reader:
            cells = dict(zip(header, row))
            records.append(
                TrialRecord(
                    trial=int(cells["trial"]),
                    seed=int(cells["seed"]),
                    mode=cells["mode"],
                    rounds=int(cells["rounds"]),
                    correct=_parse_bool(cells["correct"]),
                    xi_held=_parse_bool(cells["xi_held"]),
                    bound_value=float(cells["bound_value"]) if cells["bound_value"] else None,
                    bound_satisfied=_parse_bool(cells["bound_satisfied"]),
                    pulls=tuple(int(cells[c]) for c in pull_cols),
                    wall_ms=float(cells["wall_ms"]),
                )
            )
    return tuple(records)
