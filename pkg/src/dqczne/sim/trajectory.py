"""Shot sampling with stochastic Pauli trajectories.

Shots are simulated as a batch of statevectors.  Every shot draws its
random numbers from its own Philox stream keyed on ``(seed, shot index)``,
consuming a fixed number of uniforms per gate, so results do not depend on
batching or execution order.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..circuit import COND, MEASURE, RESET, Circuit
from .core import DEFAULT_SHOTS_CAP, PAULI, NoiseModel, apply_matrix, check_capacity, gate_matrix

_BATCH_AMPLITUDES = 1 << 21
_PAULI_MATS = [PAULI["I"], PAULI["X"], PAULI["Y"], PAULI["Z"]]


@dataclass
class ShotResult:
    counts: dict[str, int]
    shots: int
    seed: int
    data_qubits: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to shots")

    def probabilities(self) -> dict[str, float]:
        return {b: c / self.shots for b, c in self.counts.items()}

    def parity(self) -> float:
        return sum(c * (-1) ** b.count("1") for b, c in self.counts.items()) / self.shots


def shot_uniforms(seed: int, shot: int, count: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**63 - 1), shot])))
    return gen.random(count)


def _draws_needed(c: Circuit, noise: NoiseModel) -> int:
    n = 1  # final readout
    for g in c.gates:
        if g.kind in (MEASURE, RESET) or (g.is_unitary and noise.prob(g) > 0):
            n += 1
    return n


def _pauli_product(qubit_count: int) -> list[np.ndarray]:
    """All non-identity Pauli products on ``qubit_count`` qubits, in a fixed order."""
    out = []
    for combo in itertools.product(range(4), repeat=qubit_count):
        if any(combo):
            m = np.ones((1, 1), dtype=complex)
            for c in combo:
                m = np.kron(m, _PAULI_MATS[c])
            out.append(m)
    return out


_PAULI_PRODUCTS = {1: _pauli_product(1), 2: _pauli_product(2), 3: _pauli_product(3)}


def _project(psi: np.ndarray, q: int, u: np.ndarray) -> np.ndarray:
    """Born-rule collapse of qubit q for every shot; returns outcomes (0/1)."""
    axis = q + 1
    amp1 = np.take(psi, 1, axis=axis)
    p1 = np.sum(np.abs(amp1.reshape(len(psi), -1)) ** 2, axis=1)
    outcome = (u < p1).astype(np.int8)
    keep = np.where(outcome == 1, p1, 1.0 - p1)
    idx0 = [slice(None)] * psi.ndim
    idx1 = [slice(None)] * psi.ndim
    idx0[axis], idx1[axis] = 0, 1
    shape = (len(psi),) + (1,) * (psi.ndim - 2)
    norm = np.sqrt(np.maximum(keep, 1e-300)).reshape(shape)
    zero_out1 = (outcome == 1).reshape(shape)
    psi[tuple(idx0)] = np.where(zero_out1, 0.0, psi[tuple(idx0)] / norm)
    psi[tuple(idx1)] = np.where(zero_out1, psi[tuple(idx1)] / norm, 0.0)
    return outcome


def _run_batch(c: Circuit, noise: NoiseModel, uniforms: np.ndarray) -> list[str]:
    shots = len(uniforms)
    n = c.num_qubits
    psi = np.zeros((shots,) + (2,) * n, dtype=complex)
    psi[(slice(None),) + (0,) * n] = 1.0
    bits = np.zeros((shots, max(c.num_clbits, 1)), dtype=np.int8)
    col = 0
    for g in c.gates:
        axes = [q + 1 for q in g.qubits]
        if g.kind == MEASURE:
            bits[:, g.clbit] = _project(psi, g.qubits[0], uniforms[:, col])
            col += 1
        elif g.kind == RESET:
            flipped = _project(psi, g.qubits[0], uniforms[:, col]) == 1
            col += 1
            if flipped.any():
                psi[flipped] = apply_matrix(psi[flipped], PAULI["X"], axes)
        elif g.kind == COND:
            on = bits[:, g.clbit] == 1
            if on.any():
                psi[on] = apply_matrix(psi[on], PAULI[g.inner.upper()], axes)
        else:
            psi = apply_matrix(psi, gate_matrix(g), axes)
            p = noise.prob(g)
            if p > 0:
                u = uniforms[:, col]
                col += 1
                paulis = _PAULI_PRODUCTS[len(g.qubits)]
                hit = u < p
                which = np.minimum((u / p * len(paulis)).astype(int), len(paulis) - 1)
                for i in np.unique(which[hit]):
                    sel = hit & (which == i)
                    psi[sel] = apply_matrix(psi[sel], paulis[i], axes)
    # final readout of the data qubits in their listed order
    probs = np.abs(psi.reshape(shots, -1)) ** 2
    cdf = np.cumsum(probs, axis=1)
    u = uniforms[:, col] * cdf[:, -1]
    index = np.minimum((cdf < u[:, None]).sum(axis=1), probs.shape[1] - 1)
    out = []
    for idx in index:
        full = format(int(idx), f"0{n}b") if n else ""
        out.append("".join(full[q] for q in c.data_qubits))
    return out


def simulate_shots(
    c: Circuit, noise: NoiseModel, shots: int, seed: int, max_qubits: int = DEFAULT_SHOTS_CAP
) -> ShotResult:
    """Sample ``shots`` trajectories; record the data-qubit bitstring of each."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    check_capacity(c, max_qubits, "trajectory")
    draws = _draws_needed(c, noise)
    batch = max(1, _BATCH_AMPLITUDES >> c.num_qubits)
    counts: Counter[str] = Counter()
    for start in range(0, shots, batch):
        stop = min(shots, start + batch)
        uniforms = np.stack([shot_uniforms(seed, s, draws) for s in range(start, stop)])
        counts.update(_run_batch(c, noise, uniforms))
    return ShotResult(dict(sorted(counts.items())), shots, seed, c.data_qubits)
