"""Experiment configuration, metrics, parameter sweeps and aggregation."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, depth, generate_benchmark
from .distribute import COMM_SCOPES, MODES, distributed_stats, lower
from .partition import cut_edges, partition
from .sim import (
    DEFAULT_EXACT_CAP,
    DEFAULT_SHOTS_CAP,
    NOISELESS,
    NoiseModel,
    ZObservable,
    exact_distribution,
    simulate_exact_expectation,
    simulate_shots,
    support,
)
from .sim.pauli import MAX_QUBITS as PAULI_MAX_QUBITS
from .zne import STRATEGIES, ScaleSchedule, build_scaled_circuits, extrapolate_linear

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ALGORITHMS = ("ghz", "dj", "w")
BACKENDS = ("exact", "shots")
OBSERVABLES = ("z_parity", "ideal_projector")
EXCLUSION_THRESHOLD = 0.03
DEFAULT_TRIM = 0.1
STATUS_OK = "ok"
STATUS_SKIPPED = "skipped_capacity"

DEFAULT_GRID: dict[str, list[Any]] = {
    "algorithm": ["ghz", "dj", "w"],
    "n": [4, 6, 8],
    "k": [2, 3, 4, 5, 6],
    "p_local": [0.001, 0.005, 0.01, 0.015, 0.02],
    "alpha": [1.0, 1.1, 1.2],
    "strategy": ["global", "local"],
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "ghz"
    n: int = 4
    k: int = 2
    p_local: float = 0.01
    alpha: float = 1.0
    strategy: str = "global"
    shots: int = 200
    backend: str = "exact"
    mode: str = "roundtrip"
    comm_scope: str = "bell_only"
    observable: str = "z_parity"
    seed: int = 0
    max_qubits: int = 0  # 0 -> backend default

    def __post_init__(self) -> None:
        for name, allowed in (
            ("algorithm", ALGORITHMS),
            ("strategy", STRATEGIES),
            ("backend", BACKENDS),
            ("mode", MODES),
            ("comm_scope", COMM_SCOPES),
            ("observable", OBSERVABLES),
        ):
            value = str(getattr(self, name)).lower()
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
            object.__setattr__(self, name, value)
        for name in ("n", "k", "shots", "seed", "max_qubits"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "p_local", float(self.p_local))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"k must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")
        if not 0.0 <= self.p_local <= 1.0:
            raise ConfigError("p_local must be in [0, 1]")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.max_qubits < 0:
            raise ConfigError("max_qubits must be >= 0")
        if self.max_qubits == 0:
            cap = DEFAULT_EXACT_CAP if self.backend == "exact" else DEFAULT_SHOTS_CAP
            object.__setattr__(self, "max_qubits", cap)

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(self.p_local, self.alpha)

    def canonical(self) -> str:
        """Stable encoding of every field except the master seed."""
        d = dataclasses.asdict(self)
        d.pop("seed")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


def experiment_seed(cfg: ExperimentConfig) -> int:
    digest = hashlib.sha256(f"{cfg.seed}|{cfg.canonical()}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _sub_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}|{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class MetricsRecord:
    # config echo
    algorithm: str
    n: int
    k: int
    p_local: float
    alpha: float
    strategy: str
    shots: int
    backend: str
    mode: str
    comm_scope: str
    observable: str
    seed: int
    max_qubits: int
    # headline metrics
    E_baseline: float = math.nan
    E_zne: float = math.nan
    delta_E: float = math.nan
    error_reduction: float = math.nan
    depth_overhead_max_lambda: float = math.nan
    depth_overhead_total: float = math.nan
    per_partition_depth_max: int = 0
    cut_count: int = 0
    teleport_count: int = 0
    ancilla_count: int = 0
    excluded_flag: bool = False
    backend_used: str = ""
    # bookkeeping and raw values the metrics are recomputable from
    status: str = STATUS_OK
    run_seed: int = 0
    total_qubits: int = 0
    ideal_expectation: float = math.nan
    baseline_expectation: float = math.nan
    zne_expectation: float = math.nan
    depth_original: int = 0
    depth_baseline: int = 0
    depth_zne_max_lambda: int = 0
    depth_zne_total: int = 0
    comm_gates_min: int = 0
    comm_gates_max: int = 0
    teleports_min: int = 0
    teleports_max: int = 0
    assignment_consistent: bool = True
    scale_factors: str = ""
    scale_expectations: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


RECORD_FIELDS = tuple(f.name for f in fields(MetricsRecord))
CONFIG_FIELDS = tuple(f.name for f in fields(ExperimentConfig))


def error_metrics(ideal: float, baseline: float, mitigated: float) -> dict[str, float | bool]:
    """Absolute errors, their difference, fractional reduction and the exclusion flag."""
    e_base = abs(baseline - ideal)
    e_zne = abs(mitigated - ideal)
    delta = e_base - e_zne
    reduction = delta / e_base if e_base > 0 else math.nan
    return {
        "E_baseline": e_base,
        "E_zne": e_zne,
        "delta_E": delta,
        "error_reduction": reduction,
        "excluded_flag": e_base < EXCLUSION_THRESHOLD,
    }


def depth_overhead(amplified: float, original: float) -> float:
    if original <= 0:
        raise ValueError("original depth must be positive")
    return amplified / original


def build_observable(kind: str, c: Circuit) -> ZObservable:
    nd = len(c.data_qubits)
    if kind == "z_parity":
        return ZObservable.parity(nd)
    if kind == "ideal_projector":
        ideal = exact_distribution(c, NOISELESS, max_qubits=PAULI_MAX_QUBITS)
        return ZObservable.projector(nd, support(ideal))
    raise ConfigError(f"unknown observable {kind!r}")


def _evaluate(cfg: ExperimentConfig, circuit: Circuit, obs: ZObservable, seed: int) -> float:
    if cfg.backend == "exact":
        return simulate_exact_expectation(circuit, cfg.noise, obs, max_qubits=cfg.max_qubits)
    result = simulate_shots(circuit, cfg.noise, cfg.shots, seed, max_qubits=cfg.max_qubits)
    return obs.value_on_distribution(result.probabilities())


def _backend_label(cfg: ExperimentConfig) -> str:
    return "exact" if cfg.backend == "exact" else f"shots:{cfg.shots}"


def run_experiment(cfg: ExperimentConfig, schedule: ScaleSchedule = ScaleSchedule()) -> MetricsRecord:
    """Ideal, unmitigated distributed and mitigated expectation values plus all metrics."""
    rec = MetricsRecord(**dataclasses.asdict(cfg))
    rec.run_seed = experiment_seed(cfg)
    rec.backend_used = _backend_label(cfg)
    rec.scale_factors = ";".join(repr(s) for s in schedule)

    c = generate_benchmark(cfg.algorithm, cfg.n)
    a = partition(c, cfg.k)
    obs = build_observable(cfg.observable, c)
    base = lower(c, a, cfg.mode, cfg.comm_scope)
    base_stats = distributed_stats(base, c)
    scaled, consistent = build_scaled_circuits(cfg.strategy, c, a, schedule, cfg.mode, cfg.comm_scope)

    rec.cut_count = cut_edges(c, a)
    rec.teleport_count = base.teleports
    rec.ancilla_count = len(base.ancillas)
    rec.depth_original = depth(c)
    rec.depth_baseline = base_stats["depth"]
    rec.assignment_consistent = consistent
    rec.total_qubits = max(d.circuit.num_qubits for d in [base, *scaled])

    stats = [distributed_stats(d) for d in scaled]
    rec.depth_zne_max_lambda = stats[-1]["depth"]
    rec.depth_zne_total = sum(s["depth"] for s in stats)
    rec.per_partition_depth_max = max(stats[-1]["partition_depths"])
    rec.depth_overhead_max_lambda = depth_overhead(rec.depth_zne_max_lambda, rec.depth_original)
    rec.depth_overhead_total = depth_overhead(rec.depth_zne_total, rec.depth_original)
    comm = [s["comm_gates"] for s in stats]
    tele = [s["teleports"] for s in stats]
    rec.comm_gates_min, rec.comm_gates_max = min(comm), max(comm)
    rec.teleports_min, rec.teleports_max = min(tele), max(tele)

    if rec.total_qubits > cfg.max_qubits:
        rec.status = STATUS_SKIPPED
        return rec

    ideal = simulate_exact_expectation(c, NOISELESS, obs, max_qubits=PAULI_MAX_QUBITS)
    baseline = _evaluate(cfg, base.circuit, obs, _sub_seed(rec.run_seed, "baseline"))
    values = [
        _evaluate(cfg, d.circuit, obs, _sub_seed(rec.run_seed, f"scale{i}")) for i, d in enumerate(scaled)
    ]
    mitigated = extrapolate_linear(list(zip(schedule, values)))

    rec.ideal_expectation = ideal
    rec.baseline_expectation = baseline
    rec.zne_expectation = mitigated
    rec.scale_expectations = ";".join(_fmt_float(v) for v in values)
    for key, value in error_metrics(ideal, baseline, mitigated).items():
        setattr(rec, key, value)
    return rec


# --- sweeps -------------------------------------------------------------------


def expand_grid(grid: Mapping[str, Any]) -> list[ExperimentConfig]:
    """Cartesian product of the grid axes, iterated in ExperimentConfig field order."""
    unknown = set(grid) - set(CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    axes = []
    for name in CONFIG_FIELDS:
        if name not in grid:
            continue
        values = grid[name]
        values = list(values) if isinstance(values, (list, tuple)) else [values]
        if not values:
            raise ConfigError(f"axis {name!r} is empty")
        axes.append((name, values))
    names = [a[0] for a in axes]
    return [ExperimentConfig(**dict(zip(names, combo))) for combo in itertools.product(*(a[1] for a in axes))]


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


def records_to_csv(records: Iterable[MetricsRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, f)) for f in RECORD_FIELDS])
    return buf.getvalue()


def sweep(
    grid: Mapping[str, Any] | Sequence[ExperimentConfig],
    out: str | Path | None = None,
    workers: int = 1,
    schedule: ScaleSchedule = ScaleSchedule(),
) -> list[MetricsRecord]:
    """Run every grid point and write one CSV row per point, in grid order."""
    configs = list(grid) if not isinstance(grid, Mapping) else expand_grid(grid)
    if not configs:
        raise ConfigError("grid is empty")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_experiment, configs, itertools.repeat(schedule), chunksize=4))
    else:
        records = [run_experiment(cfg, schedule) for cfg in configs]
    if out is not None:
        Path(out).write_bytes(records_to_csv(records).encode("utf-8"))
    return records


def load_config(path: str | Path) -> dict[str, Any]:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat key/value; {key!r} is a table")
    return data


def _parse_cell(name: str, text: str) -> Any:
    if text in ("true", "false"):
        return text == "true"
    kind = MetricsRecord.__dataclass_fields__[name].type if name in MetricsRecord.__dataclass_fields__ else "str"
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def read_csv(path: str | Path) -> list[dict[str, Any]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: _parse_cell(k, v) for k, v in row.items()} for row in csv.DictReader(fh)]


# --- aggregation ----------------------------------------------------------------


def trimmed_mean(values: Sequence[float], trim: float) -> float:
    if not 0 <= trim < 0.5:
        raise ValueError("trim must be in [0, 0.5)")
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return math.nan
    cut = int(trim * len(v))
    return float(np.mean(v[cut : len(v) - cut]))


SUMMARY_METRICS = ("error_reduction", "depth_overhead_max_lambda", "depth_overhead_total")


def summarize(
    records: Iterable[MetricsRecord | Mapping[str, Any]],
    group_by: Sequence[str] = ("strategy",),
    trim: float = DEFAULT_TRIM,
    metrics: Sequence[str] = SUMMARY_METRICS,
) -> list[dict[str, Any]]:
    """Trimmed mean and median per group and metric.

    Skipped rows are ignored.  Records with ``excluded_flag`` are dropped from
    error-reduction aggregates only; depth aggregates keep them.
    """
    if not 0 <= trim < 0.5:
        raise ValueError("trim must be in [0, 0.5)")
    rows = [dataclasses.asdict(r) if isinstance(r, MetricsRecord) else dict(r) for r in records]
    groups: dict[tuple, list[dict[str, Any]]] = {}
    for row in rows:
        if row.get("status", STATUS_OK) != STATUS_OK:
            continue
        key = tuple(row[g] for g in group_by)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda t: tuple(str(x) for x in t)):
        members = groups[key]
        for metric in metrics:
            if metric == "error_reduction":
                kept = [r for r in members if not r["excluded_flag"] and not math.isnan(float(r[metric]))]
            else:
                kept = members
            values = sorted(float(r[metric]) for r in kept)
            if not values:
                continue
            entry = dict(zip(group_by, key))
            entry.update(
                metric=metric,
                count=len(values),
                excluded=len(members) - len(values),
                trimmed_mean=trimmed_mean(values, trim),
                median=float(np.median(values)),
            )
            out.append(entry)
    return out


def summary_to_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def record_json(rec: MetricsRecord) -> str:
    d = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in dataclasses.asdict(rec).items()}
    return json.dumps(d)


__all__ = [
    "ConfigError",
    "DEFAULT_GRID",
    "EXCLUSION_THRESHOLD",
    "ExperimentConfig",
    "MetricsRecord",
    "RECORD_FIELDS",
    "depth_overhead",
    "error_metrics",
    "expand_grid",
    "experiment_seed",
    "load_config",
    "read_csv",
    "records_to_csv",
    "record_json",
    "run_experiment",
    "summarize",
    "sweep",
    "trimmed_mean",
]
