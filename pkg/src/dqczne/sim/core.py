"""Noise model, observables, gate matrices and the exact-engine instruction stream."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..circuit import CCX, COMM, COND, CX, H, MEASURE, RESET, RY, RZ, T, TDG, X, Z, Circuit, Gate

DEFAULT_EXACT_CAP = 12
DEFAULT_SHOTS_CAP = 24


class CapacityError(RuntimeError):
    """Circuit exceeds the backend's qubit cap."""


class FeedForwardError(ValueError):
    """A conditioned gate cannot be realised as a controlled gate exactly."""


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing noise: ``p_local`` on local gates, ``alpha * p_local`` (capped at 1) on comm gates."""

    p_local: float = 0.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_local <= 1.0:
            raise ValueError(f"p_local must be in [0, 1], got {self.p_local}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def p_comm(self) -> float:
        return min(1.0, self.alpha * self.p_local)

    def prob(self, g: Gate) -> float:
        if not g.is_unitary:
            return 0.0
        return self.p_comm if g.tag == COMM else self.p_local


NOISELESS = NoiseModel(0.0, 1.0)


# --- observables ----------------------------------------------------------


@dataclass(frozen=True)
class ZObservable:
    """Real combination of Z-strings over the data qubits.

    ``terms`` maps a tuple of data positions (indices into
    ``Circuit.data_qubits``) to a coefficient.
    """

    terms: tuple[tuple[tuple[int, ...], float], ...]
    name: str = "custom"

    @classmethod
    def parity(cls, n: int) -> ZObservable:
        return cls((((tuple(range(n))), 1.0),), "z_parity")

    @classmethod
    def single_z(cls, position: int) -> ZObservable:
        return cls((((position,), 1.0),), f"z{position}")

    @classmethod
    def projector(cls, n: int, support: Iterable[str]) -> ZObservable:
        """Projector onto a set of data bitstrings, expanded as sum_T c_T Z_T."""
        bits = [s for s in sorted(set(support))]
        if any(len(s) != n or set(s) - {"0", "1"} for s in bits):
            raise ValueError("support bitstrings must have length n over {0,1}")
        terms = []
        for mask in range(1 << n):
            positions = tuple(i for i in range(n) if mask >> (n - 1 - i) & 1)
            coef = sum((-1) ** sum(s[i] == "1" for i in positions) for s in bits) / (1 << n)
            if coef != 0.0:
                terms.append((positions, coef))
        return cls(tuple(terms), "ideal_projector")

    def value_on_distribution(self, probs: dict[str, float]) -> float:
        total = 0.0
        for positions, coef in self.terms:
            total += coef * sum(p * (-1) ** sum(b[i] == "1" for i in positions) for b, p in probs.items())
        return total


# --- matrices ---------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _controlled(u: np.ndarray, controls: int = 1) -> np.ndarray:
    dim = 2 ** (controls + 1)
    m = np.eye(dim, dtype=complex)
    m[dim - 2 :, dim - 2 :] = u
    return m


@lru_cache(maxsize=None)
def kind_matrix(kind: str, angle: float | None, inner: str | None) -> np.ndarray:
    if kind == H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if kind == X:
        return PAULI["X"]
    if kind == Z:
        return PAULI["Z"]
    if kind == T:
        return np.diag([1, np.exp(0.25j * math.pi)])
    if kind == TDG:
        return np.diag([1, np.exp(-0.25j * math.pi)])
    if kind == RZ:
        return _rz(angle)
    if kind == RY:
        return _ry(angle)
    if kind == CX:
        return _controlled(PAULI["X"])
    if kind == CCX:
        return _controlled(PAULI["X"], 2)
    if kind == COND:  # realised as a controlled-Pauli from the measured qubit
        return _controlled(PAULI[inner.upper()])
    raise ValueError(f"no matrix for {kind}")


def gate_matrix(g: Gate) -> np.ndarray:
    """Unitary of ``g``; the first listed qubit is the most significant factor."""
    m = kind_matrix(g.kind, g.angle, g.inner)
    m.setflags(write=False)
    return m


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of a unitary-only circuit (qubit 0 most significant)."""
    n = c.num_qubits
    u = np.eye(2**n, dtype=complex).reshape((2,) * n + (2**n,))
    for g in c.gates:
        if not g.is_unitary:
            raise ValueError(f"{g.kind} is not unitary")
        u = apply_matrix(u, gate_matrix(g), g.qubits)
    return u.reshape(2**n, 2**n)


def apply_matrix(tensor: np.ndarray, m: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a 2^k x 2^k matrix into the given tensor axes (each of size 2)."""
    k = len(axes)
    mt = m.reshape((2,) * (2 * k))
    out = np.tensordot(mt, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


# --- exact-engine instruction stream --------------------------------------


@dataclass(frozen=True)
class Op:
    """Channel primitive for the exact engines.

    kind: "unitary" (matrix on qubits, followed by depolarizing ``p``),
    "dephase" or "reset".
    """

    kind: str
    qubits: tuple[int, ...]
    gate: Gate | None = None
    p: float = 0.0


def resolve(c: Circuit, noise: NoiseModel) -> list[Op]:
    """Translate a circuit with feed-forward into channels acting on qubits only.

    measure q -> b   becomes complete dephasing of q, remembering q as b's source;
    if(b) P t        becomes controlled-P(source(b), t).

    This is exact as long as the source qubit is untouched between the
    measurement and every conditioned use of its bit; violations raise.
    """
    source: dict[int, int] = {}
    dirty: set[int] = set()  # clbits whose source qubit has since been touched
    ops: list[Op] = []
    for g in c.gates:
        if g.kind == COND:
            if g.clbit not in source:
                raise FeedForwardError(f"conditional on bit {g.clbit} before it is measured")
            if g.clbit in dirty:
                raise FeedForwardError(f"bit {g.clbit}: source qubit modified before conditional use")
            ctrl = source[g.clbit]
            if ctrl == g.qubits[0]:
                raise FeedForwardError("conditional gate targets its own source qubit")
            ops.append(Op("unitary", (ctrl, g.qubits[0]), g, 0.0))
            touched = g.qubits
        elif g.kind == MEASURE:
            if g.clbit in source:
                raise FeedForwardError(f"bit {g.clbit} written twice")
            ops.append(Op("dephase", g.qubits))
            touched = g.qubits
        elif g.kind == RESET:
            ops.append(Op("reset", g.qubits))
            touched = g.qubits
        else:
            ops.append(Op("unitary", g.qubits, g, noise.prob(g)))
            touched = g.qubits
        for b, q in source.items():
            if q in touched and b not in dirty:
                dirty.add(b)
        if g.kind == MEASURE:
            source[g.clbit] = g.qubits[0]
    return ops


def check_capacity(c: Circuit, cap: int, backend: str) -> None:
    if c.num_qubits > cap:
        raise CapacityError(f"{backend} backend is limited to {cap} qubits; circuit has {c.num_qubits}")


def bitstrings(n: int) -> list[str]:
    return ["".join(bits) for bits in itertools.product("01", repeat=n)]
