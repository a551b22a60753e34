"""Dense density-matrix engine.

The state is kept as a tensor with ``2n`` axes of size 2: axis ``q`` is the
ket index of qubit ``q`` and axis ``n + q`` its bra index.  Memory grows as
4^n, so this engine is the reference implementation for small circuits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit
from .core import (
    DEFAULT_EXACT_CAP,
    NoiseModel,
    Op,
    ZObservable,
    apply_matrix,
    bitstrings,
    check_capacity,
    gate_matrix,
    resolve,
)


@dataclass
class DensityState:
    n: int
    tensor: np.ndarray

    @classmethod
    def zero(cls, n: int) -> DensityState:
        t = np.zeros((2,) * (2 * n), dtype=complex)
        t[(0,) * (2 * n)] = 1.0
        return cls(n, t)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> DensityState:
        dim = m.shape[0]
        n = dim.bit_length() - 1
        if m.shape != (dim, dim) or 2**n != dim:
            raise ValueError("density matrix must be 2^n x 2^n")
        return cls(n, np.asarray(m, dtype=complex).reshape((2,) * (2 * n)).copy())

    @property
    def matrix(self) -> np.ndarray:
        d = 2**self.n
        return self.tensor.reshape(d, d)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def expectation(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(op @ self.matrix)))


def apply_unitary(state: DensityState, u: np.ndarray, qubits: tuple[int, ...]) -> DensityState:
    n = state.n
    t = apply_matrix(state.tensor, u, qubits)
    t = apply_matrix(t, u.conj(), [n + q for q in qubits])
    return DensityState(n, t)


def apply_depolarizing(state: DensityState, qubits: tuple[int, ...], p: float) -> DensityState:
    """k-qubit depolarizing channel: a uniformly random non-identity Pauli with probability p.

    Uses the twirl identity sum_{all P} P rho P = 2^k Tr_S(rho) (x) I_S, so
    rho -> (1 - p - p/(4^k - 1)) rho + p 2^k/(4^k - 1) Tr_S(rho) (x) I_S.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must be in [0, 1], got {p}")
    if p == 0.0:
        return state
    n, k = state.n, len(qubits)
    d2 = 4**k
    ket = list(qubits)
    bra = [n + q for q in qubits]
    rest = [ax for ax in range(2 * n) if ax not in ket and ax not in bra]
    t = np.transpose(state.tensor, ket + bra + rest).reshape((2**k, 2**k) + (2,) * len(rest))
    reduced = np.trace(t, axis1=0, axis2=1)
    mixed = np.einsum("ab,...->ab...", np.eye(2**k), reduced)
    out = (1 - p - p / (d2 - 1)) * t + (p * 2**k / (d2 - 1)) * mixed
    out = out.reshape((2,) * (2 * n))
    return DensityState(n, np.transpose(out, np.argsort(ket + bra + rest)))


def apply_dephasing(state: DensityState, q: int) -> DensityState:
    t = state.tensor.copy()
    idx = [slice(None)] * (2 * state.n)
    for a, b in ((0, 1), (1, 0)):
        idx[q], idx[state.n + q] = a, b
        t[tuple(idx)] = 0.0
    return DensityState(state.n, t)


def apply_reset(state: DensityState, q: int) -> DensityState:
    n = state.n
    reduced = np.trace(state.tensor, axis1=q, axis2=n + q)
    t = np.zeros_like(state.tensor)
    idx = [slice(None)] * (2 * n)
    idx[q], idx[n + q] = 0, 0
    t[tuple(idx)] = reduced
    return DensityState(n, t)


def run_ops(state: DensityState, ops: list[Op]) -> DensityState:
    for op in ops:
        if op.kind == "unitary":
            state = apply_unitary(state, gate_matrix(op.gate), op.qubits)
            if op.p:
                state = apply_depolarizing(state, op.qubits, op.p)
        elif op.kind == "dephase":
            state = apply_dephasing(state, op.qubits[0])
        elif op.kind == "reset":
            state = apply_reset(state, op.qubits[0])
        else:  # pragma: no cover - resolve() only emits the kinds above
            raise ValueError(op.kind)
    return state


def simulate_density(c: Circuit, noise: NoiseModel, max_qubits: int = DEFAULT_EXACT_CAP) -> DensityState:
    check_capacity(c, max_qubits, "density-matrix")
    return run_ops(DensityState.zero(c.num_qubits), resolve(c, noise))


def data_distribution(state: DensityState, data_qubits: tuple[int, ...]) -> dict[str, float]:
    """Marginal Z-basis distribution over ``data_qubits`` (in that order)."""
    probs = state.probabilities().reshape((2,) * state.n)
    others = tuple(q for q in range(state.n) if q not in data_qubits)
    marg = probs.sum(axis=others) if others else probs
    # remaining axes are in ascending qubit order; reorder to data order
    order = sorted(data_qubits)
    marg = np.transpose(marg, [order.index(q) for q in data_qubits]).reshape(-1)
    return {b: float(p) for b, p in zip(bitstrings(len(data_qubits)), marg)}


def density_expectation(
    c: Circuit, noise: NoiseModel, observable: ZObservable, max_qubits: int = DEFAULT_EXACT_CAP
) -> float:
    state = simulate_density(c, noise, max_qubits)
    return observable.value_on_distribution(data_distribution(state, c.data_qubits))
