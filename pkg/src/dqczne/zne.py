"""Unitary folding, linear zero-noise extrapolation and the Global/Local strategies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import MEASURE, Circuit, Gate, adjoint, depth
from .distribute import DistributedCircuit, distributed_stats, lower
from .partition import Assignment, partition

DEFAULT_SCALES = (1.0, 1.5, 2.0, 2.5, 3.0)
STRATEGIES = ("global", "local")


class FoldError(ValueError):
    pass


class ExtrapolationError(ValueError):
    pass


@dataclass(frozen=True)
class ScaleSchedule:
    factors: tuple[float, ...] = DEFAULT_SCALES

    def __post_init__(self) -> None:
        f = tuple(float(x) for x in self.factors)
        object.__setattr__(self, "factors", f)
        if not f or f[0] != 1.0:
            raise ValueError("scale schedule must start at 1.0")
        if any(b <= a for a, b in zip(f, f[1:])):
            raise ValueError("scale factors must be strictly increasing")

    def __iter__(self):
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)


def fold_count(scale: float, num_gates: int) -> int:
    """Extra gate pairs for a target scale: round-half-up((scale - 1) * L / 2)."""
    if scale < 1:
        raise FoldError(f"scale factor must be >= 1, got {scale}")
    return int(math.floor((scale - 1) * num_gates / 2 + 0.5))


def _fold_in_place(g: Gate, times: int) -> list[Gate]:
    out = [g]
    for _ in range(times):
        out += [adjoint(g), g]
    return out


def fold_global(c: Circuit, scale: float) -> Circuit:
    """Whole-circuit unitary folding U (U^dag U)^f, remainder folded gate-wise at the end.

    Measurements must be terminal and are re-appended after the folded body.
    """
    body = list(c.gates)
    tail: list[Gate] = []
    while body and body[-1].kind == MEASURE:
        tail.insert(0, body.pop())
    if any(not g.is_unitary for g in body):
        raise FoldError("fold_global needs a unitary body followed only by terminal measurements")
    L = len(body)
    if L == 0:
        raise FoldError("circuit has no unitary gates to fold")
    k = fold_count(scale, L)
    f, r = divmod(k, L)
    inverse = [adjoint(g) for g in reversed(body)]
    folded = list(body)
    for _ in range(f):
        folded += inverse + body
    if r:
        last = folded[-r:]
        folded = folded[:-r]
        for g in last:
            folded += _fold_in_place(g, 1)
    return c.with_gates(folded + tail)


def _foldable(g: Gate) -> bool:
    return g.is_unitary and g.tag != "comm"


def fold_local(d: DistributedCircuit, scale: float) -> DistributedCircuit:
    """Gate-level folding applied independently to each partition's local unitaries.

    Communication gates, measurements, resets and conditionals are never
    folded, and the gate order is otherwise unchanged.
    """
    if scale < 1:
        raise FoldError(f"scale factor must be >= 1, got {scale}")
    gates = d.circuit.gates
    owner = d.assignment.part_of
    by_part: dict[int, list[int]] = {}
    for i, g in enumerate(gates):
        if _foldable(g):
            parts = {owner[q] for q in g.qubits}
            if len(parts) != 1:
                raise FoldError(f"local gate {g} spans partitions {sorted(parts)}")
            by_part.setdefault(parts.pop(), []).append(i)
    times = [0] * len(gates)
    for idx in by_part.values():
        L = len(idx)
        f, r = divmod(fold_count(scale, L), L)
        for pos, i in enumerate(idx):
            times[i] = f + (1 if pos >= L - r else 0)
    out: list[Gate] = []
    for g, m in zip(gates, times):
        out += _fold_in_place(g, m) if m else [g]
    return d.with_circuit(d.circuit.with_gates(out))


def extrapolate_linear(points: Sequence[tuple[float, float]]) -> float:
    """Ordinary least-squares line through (scale, value); returns its value at scale 0."""
    if len(points) < 2:
        raise ExtrapolationError("need at least two points")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ExtrapolationError("all scale factors are identical")
    slope = float(dx @ (y - y.mean())) / sxx
    return float(y.mean() - slope * x.mean())


@dataclass
class ScaleRun:
    """One executed circuit of a mitigation schedule."""

    scale: float
    expectation: float
    depth: int
    max_partition_depth: int
    comm_gates: int
    teleports: int
    num_qubits: int


@dataclass
class MitigationResult:
    strategy: str
    runs: list[ScaleRun]
    zero_noise_estimate: float
    assignments_consistent: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def per_scale(self) -> list[tuple[float, float]]:
        return [(r.scale, r.expectation) for r in self.runs]


def build_scaled_circuits(
    strategy: str,
    c: Circuit,
    a: Assignment,
    schedule: ScaleSchedule,
    mode: str = "roundtrip",
    comm_scope: str = "bell_only",
    repartition: bool = True,
) -> tuple[list[DistributedCircuit], bool]:
    """The distributed circuit executed at each scale factor.

    Global folds the monolithic circuit and then distributes it (re-running
    the partitioner on the folded circuit when ``repartition`` is set);
    Local distributes once and folds each partition.  Returns the circuits
    and whether every Global repartition reproduced ``a``.
    """
    strategy = strategy.lower()
    consistent = True
    if strategy == "global":
        out = []
        for s in schedule:
            folded = fold_global(c, s)
            assignment = a
            if repartition:
                assignment = partition(folded, a.k)
                consistent &= assignment == a
            out.append(lower(folded, assignment, mode, comm_scope))
        return out, consistent
    if strategy == "local":
        base = lower(c, a, mode, comm_scope)
        return [fold_local(base, s) for s in schedule], consistent
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def mitigate(
    strategy: str,
    c: Circuit,
    a: Assignment,
    evaluate: Callable[[Circuit, int], float],
    schedule: ScaleSchedule = ScaleSchedule(),
    mode: str = "roundtrip",
    comm_scope: str = "bell_only",
    repartition: bool = True,
) -> MitigationResult:
    """Run one ZNE strategy.

    ``evaluate(circuit, scale_index)`` returns the noisy expectation value of
    a distributed circuit (backend, noise model and observable are bound by
    the caller).
    """
    circuits, consistent = build_scaled_circuits(strategy, c, a, schedule, mode, comm_scope, repartition)
    runs = []
    for i, (s, d) in enumerate(zip(schedule, circuits)):
        stats = distributed_stats(d)
        runs.append(
            ScaleRun(
                scale=s,
                expectation=float(evaluate(d.circuit, i)),
                depth=stats["depth"],
                max_partition_depth=max(stats["partition_depths"]),
                comm_gates=stats["comm_gates"],
                teleports=stats["teleports"],
                num_qubits=d.circuit.num_qubits,
            )
        )
    estimate = extrapolate_linear([(r.scale, r.expectation) for r in runs])
    if not math.isfinite(estimate):
        raise ExtrapolationError("non-finite zero-noise estimate")
    notes = [] if consistent else ["global repartition of a folded circuit changed the assignment"]
    return MitigationResult(strategy.lower(), runs, estimate, consistent, notes)


__all__ = [
    "DEFAULT_SCALES",
    "ExtrapolationError",
    "FoldError",
    "MitigationResult",
    "ScaleRun",
    "ScaleSchedule",
    "build_scaled_circuits",
    "depth",
    "extrapolate_linear",
    "fold_count",
    "fold_global",
    "fold_local",
    "mitigate",
]
