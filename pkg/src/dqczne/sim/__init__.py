"""Noisy simulation backends.

``exact``  -- expectation values without sampling error.  Two independent
             engines implement it: Heisenberg Pauli propagation (default,
             scales to the full sweep) and a dense density matrix (reference).
``shots``  -- stochastic Pauli trajectories sampled shot by shot.
"""

from __future__ import annotations

from ..circuit import Circuit
from .core import (
    DEFAULT_EXACT_CAP,
    DEFAULT_SHOTS_CAP,
    NOISELESS,
    CapacityError,
    FeedForwardError,
    NoiseModel,
    ZObservable,
    bitstrings,
    check_capacity,
    circuit_unitary,
    gate_matrix,
)
from .density import (
    DensityState,
    apply_depolarizing,
    data_distribution,
    density_expectation,
    simulate_density,
)
from .pauli import pauli_distribution, pauli_expectation
from .trajectory import ShotResult, simulate_shots

EXACT_METHODS = ("pauli", "density")


def simulate_exact_expectation(
    c: Circuit,
    noise: NoiseModel,
    observable: ZObservable | None = None,
    max_qubits: int = DEFAULT_EXACT_CAP,
    method: str = "pauli",
) -> float:
    """Tr(O rho) for the noisy output state of ``c``; O defaults to Z-parity over the data qubits."""
    check_capacity(c, max_qubits, "exact")
    if observable is None:
        observable = ZObservable.parity(len(c.data_qubits))
    if method == "pauli":
        return pauli_expectation(c, noise, observable)
    if method == "density":
        return density_expectation(c, noise, observable, max_qubits)
    raise ValueError(f"unknown exact method {method!r}; expected one of {EXACT_METHODS}")


def exact_distribution(
    c: Circuit, noise: NoiseModel = NOISELESS, max_qubits: int = DEFAULT_EXACT_CAP, method: str = "pauli"
) -> dict[str, float]:
    """Exact output distribution over the data qubits (bitstring in data-qubit order)."""
    check_capacity(c, max_qubits, "exact")
    if method == "pauli":
        probs = pauli_distribution(c, noise)
        return dict(zip(bitstrings(len(c.data_qubits)), (float(p) for p in probs)))
    if method == "density":
        return data_distribution(simulate_density(c, noise, max_qubits), c.data_qubits)
    raise ValueError(f"unknown exact method {method!r}; expected one of {EXACT_METHODS}")


def total_variation(p: dict[str, float], q: dict[str, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def support(dist: dict[str, float], tol: float = 1e-9) -> list[str]:
    return sorted(b for b, p in dist.items() if p > tol)


def shots_expectation(result: ShotResult, observable: ZObservable) -> float:
    return observable.value_on_distribution(result.probabilities())


__all__ = [
    "CapacityError",
    "DEFAULT_EXACT_CAP",
    "DEFAULT_SHOTS_CAP",
    "DensityState",
    "FeedForwardError",
    "NOISELESS",
    "NoiseModel",
    "ShotResult",
    "ZObservable",
    "apply_depolarizing",
    "circuit_unitary",
    "exact_distribution",
    "gate_matrix",
    "shots_expectation",
    "simulate_density",
    "simulate_exact_expectation",
    "simulate_shots",
    "support",
    "total_variation",
]
