"""Circuit intermediate representation, benchmark generators and structural helpers.

Every stage of the pipeline (partitioning, lowering, folding, simulation)
consumes and produces :class:`Circuit` objects.  Circuits and gates are
immutable; transformations return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

H, X, Z, T, TDG, RZ, RY = "h", "x", "z", "t", "tdg", "rz", "ry"
CX, CCX = "cx", "ccx"
MEASURE, RESET, COND = "measure", "reset", "cond"

LOCAL, COMM = "local", "comm"

SINGLE_QUBIT = frozenset({H, X, Z, T, TDG, RZ, RY})
ROTATIONS = frozenset({RZ, RY})
UNITARY = SINGLE_QUBIT | {CX, CCX}
ALL_KINDS = UNITARY | {MEASURE, RESET, COND}

_ARITY = {**{k: 1 for k in SINGLE_QUBIT}, CX: 2, CCX: 3, MEASURE: 1, RESET: 1, COND: 1}
_SELF_INVERSE = frozenset({H, X, Z, CX, CCX})


class CircuitError(ValueError):
    """Raised for malformed gates or circuits."""


class NoAdjointError(CircuitError):
    """Raised when asking for the adjoint of a non-unitary operation."""


@dataclass(frozen=True)
class Gate:
    """One operation.

    ``angle`` is set for rotations only, ``clbit`` for measure (written bit)
    and cond (read bit), ``inner`` for cond (``"x"`` or ``"z"``).
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    clbit: int | None = None
    inner: str | None = None
    tag: str = LOCAL

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != _ARITY[self.kind]:
            raise CircuitError(f"{self.kind} expects {_ARITY[self.kind]} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.kind} has repeated qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError("negative qubit index")
        if (self.angle is not None) != (self.kind in ROTATIONS):
            raise CircuitError(f"{self.kind}: angle must be given exactly for rotations")
        if self.angle is not None and not math.isfinite(self.angle):
            raise CircuitError("rotation angle must be finite")
        if (self.clbit is not None) != (self.kind in (MEASURE, COND)):
            raise CircuitError(f"{self.kind}: clbit must be given exactly for measure/cond")
        if self.clbit is not None and self.clbit < 0:
            raise CircuitError("negative clbit index")
        if self.kind == COND:
            if self.inner not in (X, Z):
                raise CircuitError("cond inner gate must be x or z")
        elif self.inner is not None:
            raise CircuitError("inner is only meaningful for cond")
        if self.tag not in (LOCAL, COMM):
            raise CircuitError(f"unknown tag {self.tag!r}")

    @property
    def is_unitary(self) -> bool:
        return self.kind in UNITARY

    @property
    def is_two_qubit(self) -> bool:
        return self.kind == CX

    def with_tag(self, tag: str) -> Gate:
        return replace(self, tag=tag)

    def remap(self, mapping: Sequence[int] | dict[int, int]) -> Gate:
        return replace(self, qubits=tuple(mapping[q] for q in self.qubits))

    def __str__(self) -> str:
        name = self.kind if self.kind != COND else f"if(c{self.clbit}) {self.inner}"
        args = f"({self.angle:g})" if self.angle is not None else ""
        out = f"{name}{args} " + ",".join(f"q{q}" for q in self.qubits)
        if self.kind == MEASURE:
            out += f" -> c{self.clbit}"
        return out + (" [comm]" if self.tag == COMM else "")


# Convenience constructors.
def h(q: int, tag: str = LOCAL) -> Gate:
    return Gate(H, (q,), tag=tag)


def x(q: int, tag: str = LOCAL) -> Gate:
    return Gate(X, (q,), tag=tag)


def z(q: int, tag: str = LOCAL) -> Gate:
    return Gate(Z, (q,), tag=tag)


def t(q: int) -> Gate:
    return Gate(T, (q,))


def tdg(q: int) -> Gate:
    return Gate(TDG, (q,))


def rz(theta: float, q: int) -> Gate:
    return Gate(RZ, (q,), angle=float(theta))


def ry(theta: float, q: int) -> Gate:
    return Gate(RY, (q,), angle=float(theta))


def cx(control: int, target: int, tag: str = LOCAL) -> Gate:
    return Gate(CX, (control, target), tag=tag)


def ccx(a: int, b: int, target: int) -> Gate:
    return Gate(CCX, (a, b, target))


def measure(q: int, clbit: int) -> Gate:
    return Gate(MEASURE, (q,), clbit=clbit)


def reset(q: int) -> Gate:
    return Gate(RESET, (q,))


def cond(inner: str, q: int, clbit: int) -> Gate:
    return Gate(COND, (q,), clbit=clbit, inner=inner)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over ``num_qubits`` qubits and ``num_clbits`` bits.

    ``data_qubits`` lists the physical qubits carrying the algorithm's
    logical qubits, in logical order; observables and readout use it.
    Defaults to every qubit.
    """

    num_qubits: int
    num_clbits: int = 0
    gates: tuple[Gate, ...] = ()
    data_qubits: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.data_qubits is None:
            object.__setattr__(self, "data_qubits", tuple(range(self.num_qubits)))
        else:
            object.__setattr__(self, "data_qubits", tuple(int(q) for q in self.data_qubits))
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise CircuitError("register sizes must be nonnegative")
        for i, g in enumerate(self.gates):
            if not isinstance(g, Gate):
                raise CircuitError(f"gate {i} is not a Gate")
            if max(g.qubits) >= self.num_qubits:
                raise CircuitError(f"gate {i} ({g}) addresses a qubit outside 0..{self.num_qubits - 1}")
            if g.clbit is not None and g.clbit >= self.num_clbits:
                raise CircuitError(f"gate {i} ({g}) addresses a clbit outside 0..{self.num_clbits - 1}")
        if len(set(self.data_qubits)) != len(self.data_qubits):
            raise CircuitError("data_qubits has duplicates")
        if any(not 0 <= q < self.num_qubits for q in self.data_qubits):
            raise CircuitError("data_qubits must lie within the qubit register")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates: Iterable[Gate]) -> Circuit:
        return replace(self, gates=tuple(gates))

    def count(self, kind: str | None = None, tag: str | None = None) -> int:
        return sum(
            1 for g in self.gates if (kind is None or g.kind == kind) and (tag is None or g.tag == tag)
        )

    @property
    def unitary_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.is_unitary]

    def strip_tags(self) -> Circuit:
        return self.with_gates(g.with_tag(LOCAL) for g in self.gates)

    def __str__(self) -> str:
        lines = [f"Circuit(qubits={self.num_qubits}, clbits={self.num_clbits})"]
        lines += [f"  {g}" for g in self.gates]
        return "\n".join(lines)


def adjoint(g: Gate) -> Gate:
    """Return the gate implementing the inverse unitary of ``g``."""
    if not g.is_unitary:
        raise NoAdjointError(f"{g.kind} is not unitary and has no adjoint")
    if g.kind in _SELF_INVERSE:
        return g
    if g.kind == T:
        return replace(g, kind=TDG)
    if g.kind == TDG:
        return replace(g, kind=T)
    return replace(g, angle=-g.angle)


def depth(c: Circuit) -> int:
    """ASAP layer count.

    Each gate lands one layer after the latest layer used by any of its
    qubits (or, for measure/cond, its classical bit).
    """
    qubit_level = [0] * c.num_qubits
    clbit_level = [0] * c.num_clbits
    total = 0
    for g in c.gates:
        level = max(qubit_level[q] for q in g.qubits)
        if g.clbit is not None:
            level = max(level, clbit_level[g.clbit])
        level += 1
        for q in g.qubits:
            qubit_level[q] = level
        if g.clbit is not None:
            clbit_level[g.clbit] = level
        total = max(total, level)
    return total


def toffoli_gates(a: int, b: int, target: int) -> list[Gate]:
    """Standard 15-gate Clifford+T network for CCX(a, b -> target)."""
    return [
        h(target),
        cx(b, target),
        tdg(target),
        cx(a, target),
        t(target),
        cx(b, target),
        tdg(target),
        cx(a, target),
        t(b),
        t(target),
        h(target),
        cx(a, b),
        t(a),
        tdg(b),
        cx(a, b),
    ]


def decompose_toffoli(c: Circuit) -> Circuit:
    if not any(g.kind == CCX for g in c.gates):
        return c
    out: list[Gate] = []
    for g in c.gates:
        if g.kind == CCX:
            out.extend(gg.with_tag(g.tag) for gg in toffoli_gates(*g.qubits))
        else:
            out.append(g)
    return c.with_gates(out)


# --- benchmarks -----------------------------------------------------------

BENCHMARKS = ("ghz", "dj", "w")


def ghz(n: int) -> Circuit:
    gates = [h(0)] + [cx(i, i + 1) for i in range(n - 1)]
    return Circuit(n, 0, gates)


def deutsch_jozsa(n: int, oracle: str = "balanced") -> Circuit:
    """DJ over ``n`` data qubits; qubit ``n`` is the oracle ancilla."""
    if oracle not in ("balanced", "constant"):
        raise CircuitError(f"unknown DJ oracle {oracle!r}")
    anc = n
    gates = [x(anc), h(anc)]
    gates += [h(q) for q in range(n)]
    if oracle == "balanced":
        gates += [cx(q, anc) for q in range(n)]
    gates += [h(q) for q in range(n)]
    gates += [measure(q, q) for q in range(n)]
    return Circuit(n + 1, n, gates, data_qubits=tuple(range(n)))


def controlled_ry(theta: float, control: int, target: int) -> list[Gate]:
    return [ry(theta / 2, target), cx(control, target), ry(-theta / 2, target), cx(control, target)]


def w_state(n: int) -> Circuit:
    """Single-excitation W state via a cascade of controlled-RY + CX steps.

    The excitation starts on q0; step i keeps it there with amplitude
    sqrt(1/(n-i)) and otherwise hands it on to q(i+1).
    """
    gates = [x(0)]
    for i in range(n - 1):
        theta = 2 * math.acos(math.sqrt(1 / (n - i)))
        gates += controlled_ry(theta, i, i + 1)
        gates.append(cx(i + 1, i))
    return Circuit(n, 0, gates)


def generate_benchmark(kind: str, n: int, oracle: str = "balanced") -> Circuit:
    kind = kind.lower()
    if n < 2:
        raise CircuitError(f"benchmark size must be >= 2, got {n}")
    if kind == "ghz":
        return ghz(n)
    if kind == "dj":
        return deutsch_jozsa(n, oracle)
    if kind == "w":
        return w_state(n)
    raise CircuitError(f"unknown benchmark {kind!r}; expected one of {BENCHMARKS}")
