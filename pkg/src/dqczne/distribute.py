"""Lowering of a monolithic circuit onto k QPUs with teleportation primitives.

Physical qubit layout of a lowered circuit: the original qubits keep their
indices, then one communication qubit per partition (index ``n + p``),
then any extra communication qubits allocated on demand.  Each
communication qubit belongs to exactly one partition for its lifetime.

A teleport needs a free communication qubit on the sending side (the
Bell half measured together with the state) and one on the receiving side.
In ``roundtrip`` mode the return teleport runs from the receiving partition,
which is then holding the state in its first comm qubit, so a partition
that is ever the target of a remote CX ends up with two comm qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .circuit import (
    CCX,
    COMM,
    CX,
    LOCAL,
    MEASURE,
    X,
    Z,
    Circuit,
    Gate,
    cond,
    cx,
    depth,
    h,
    measure,
    reset,
)
from .partition import Assignment

MODES = ("roundtrip", "migrate")
COMM_SCOPES = ("bell_only", "whole_template")

TEMPLATE_LENGTH = 10


class LoweringError(ValueError):
    pass


def teleport_template(
    src: int, anc_near: int, anc_far: int, c0: int, c1: int, comm_scope: str = "bell_only"
) -> list[Gate]:
    """Teleport ``src`` into ``anc_far`` through a Bell pair (anc_near, anc_far).

    Only the Bell-pair generation is tagged ``comm`` unless
    ``comm_scope="whole_template"``, which tags every unitary of the primitive.
    """
    if len({src, anc_near, anc_far}) != 3:
        raise LoweringError(f"teleport qubits must be distinct, got {(src, anc_near, anc_far)}")
    if c0 == c1:
        raise LoweringError("teleport needs two distinct classical bits")
    if comm_scope not in COMM_SCOPES:
        raise LoweringError(f"unknown comm_scope {comm_scope!r}")
    local = COMM if comm_scope == "whole_template" else LOCAL
    return [
        reset(anc_near),
        reset(anc_far),
        h(anc_near, tag=COMM),
        cx(anc_near, anc_far, tag=COMM),
        cx(src, anc_near, tag=local),
        h(src, tag=local),
        measure(src, c0),
        measure(anc_near, c1),
        cond(X, anc_far, c1),
        cond(Z, anc_far, c0),
    ]


@dataclass(frozen=True)
class DistributedCircuit:
    circuit: Circuit
    assignment: Assignment  # over every physical qubit of ``circuit``
    ancilla_of: dict[int, tuple[int, ...]]
    num_original: int
    teleports: int
    mode: str

    @property
    def comm_gate_indices(self) -> frozenset[int]:
        return frozenset(i for i, g in enumerate(self.circuit.gates) if g.tag == COMM)

    @property
    def ancillas(self) -> list[int]:
        return list(range(self.num_original, self.circuit.num_qubits))

    def with_circuit(self, circuit: Circuit) -> DistributedCircuit:
        return replace(self, circuit=circuit)

    def partition_circuit(self, p: int) -> Circuit:
        """Subsequence of gates touching partition ``p``'s physical qubits."""
        owned = {q for q, pp in enumerate(self.assignment.part_of) if pp == p}
        return self.circuit.with_gates(g for g in self.circuit.gates if owned.intersection(g.qubits))


class _Pool:
    def __init__(self, n: int, k: int):
        self.next_index = n + k
        self.part_of_extra: list[int] = []
        self.free = {p: [n + p] for p in range(k)}
        self.owned = {p: [n + p] for p in range(k)}

    def take(self, p: int) -> int:
        if not self.free[p]:
            q = self.next_index
            self.next_index += 1
            self.part_of_extra.append(p)
            self.owned[p].append(q)
            return q
        self.free[p].sort()
        return self.free[p].pop(0)

    def release(self, p: int, q: int) -> None:
        self.free[p].append(q)


def lower(
    c: Circuit, a: Assignment, mode: str = "roundtrip", comm_scope: str = "bell_only"
) -> DistributedCircuit:
    """Replace every cross-partition CX with teleportation primitives."""
    if mode not in MODES:
        raise LoweringError(f"unknown mode {mode!r}")
    if comm_scope not in COMM_SCOPES:
        raise LoweringError(f"unknown comm_scope {comm_scope!r}")
    if len(a) != c.num_qubits:
        raise LoweringError(f"assignment covers {len(a)} qubits, circuit has {c.num_qubits}")
    if any(g.kind == CCX for g in c.gates):
        raise LoweringError("circuit contains CCX; run decompose_toffoli first")

    n, k = c.num_qubits, a.k
    pool = _Pool(n, k)
    location = list(range(n))  # logical qubit -> physical qubit

    def part(phys: int) -> int:
        if phys < n:
            return a[phys]
        if phys < n + k:
            return phys - n
        return pool.part_of_extra[phys - n - k]

    gates: list[Gate] = []
    next_clbit = c.num_clbits
    teleports = 0

    def teleport(src: int, near: int, far: int) -> None:
        nonlocal next_clbit, teleports
        gates.extend(teleport_template(src, near, far, next_clbit, next_clbit + 1, comm_scope))
        next_clbit += 2
        teleports += 1

    for g in c.gates:
        if g.kind == CX:
            ctl, tgt = g.qubits
            src = location[ctl]
            ps, pt = part(src), part(location[tgt])
            if ps != pt:
                near, far = pool.take(ps), pool.take(pt)
                teleport(src, near, far)
                pool.release(ps, near)
                gates.append(cx(far, location[tgt], tag=g.tag))
                if mode == "roundtrip":
                    back_near = pool.take(pt)
                    teleport(far, back_near, src)
                    pool.release(pt, back_near)
                    pool.release(pt, far)
                else:
                    if src >= n:
                        pool.release(ps, src)
                    location[ctl] = far
                continue
        gates.append(g.remap(location))

    num_qubits = pool.next_index
    part_of = tuple(part(q) for q in range(num_qubits))
    lowered = Circuit(
        num_qubits,
        next_clbit,
        gates,
        data_qubits=tuple(location[q] for q in c.data_qubits),
    )
    return DistributedCircuit(
        circuit=lowered,
        assignment=Assignment(k, part_of),
        ancilla_of={p: tuple(qs) for p, qs in pool.owned.items()},
        num_original=n,
        teleports=teleports,
        mode=mode,
    )


def distributed_stats(d: DistributedCircuit, original: Circuit | None = None) -> dict:
    """Overhead summary for a lowered circuit."""
    sizes = [0] * d.assignment.k
    for q in range(d.num_original):
        sizes[d.assignment[q]] += 1
    stats = {
        "comm_gates": len(d.comm_gate_indices),
        "teleports": d.teleports,
        "ancillas": d.circuit.num_qubits - d.num_original,
        "depth": depth(d.circuit),
        "partition_depths": [depth(d.partition_circuit(p)) for p in range(d.assignment.k)],
        "partition_sizes": sizes,
        "mode": d.mode,
    }
    if original is not None:
        stats["original_depth"] = depth(original)
    return stats


def measured_bits_are_fresh(c: Circuit) -> bool:
    """True when every classical bit is written by at most one measurement."""
    written = [g.clbit for g in c.gates if g.kind == MEASURE]
    return len(written) == len(set(written))
