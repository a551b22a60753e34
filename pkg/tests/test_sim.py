import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqczne.circuit import Circuit, Gate, cond, cx, generate_benchmark, h, measure, reset, ry, x
from dqczne.distribute import lower
from dqczne.partition import partition
from dqczne.sim import (
    NOISELESS,
    CapacityError,
    DensityState,
    FeedForwardError,
    NoiseModel,
    ZObservable,
    apply_depolarizing,
    circuit_unitary,
    exact_distribution,
    simulate_density,
    simulate_exact_expectation,
    simulate_shots,
    total_variation,
)
from dqczne.sim.core import PAULI
from dqczne.sim.pauli import walsh_hadamard
from dqczne.sim.trajectory import shot_uniforms

from conftest import unitary_circuits

P_GRID = (0.0, 0.001, 0.02, 1.0)


def depolarize_by_sum(rho, n, qubits, p):
    """(1-p) rho + p/(4^k-1) sum over non-identity Pauli strings P on ``qubits``: P rho P."""
    k = len(qubits)
    paulis = [PAULI[s] for s in "IXYZ"]
    out = (1 - p) * rho
    for combo in itertools.product(range(4), repeat=k):
        if not any(combo):
            continue
        full = np.ones((1, 1))
        for q in range(n):
            full = np.kron(full, paulis[combo[qubits.index(q)]] if q in qubits else PAULI["I"])
        out = out + p / (4**k - 1) * full @ rho @ full.conj().T
    return out


def random_density(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("p", P_GRID)
def test_gate_noise_on_basis_states(p):
    noise = NoiseModel(p)
    one = Circuit(1, 0, [x(0)])
    two = Circuit(2, 0, [cx(0, 1)])
    for method in ("pauli", "density"):
        z = simulate_exact_expectation(one, noise, ZObservable.single_z(0), method=method)
        assert z == pytest.approx(-(1 - 4 * p / 3), abs=1e-12)
        zi = simulate_exact_expectation(two, noise, ZObservable.single_z(0), method=method)
        assert zi == pytest.approx(1 - 16 * p / 15, abs=1e-12)


@pytest.mark.parametrize("p", P_GRID)
def test_channel_formulas_direct(p):
    one = apply_depolarizing(DensityState.zero(1), (0,), p)
    assert one.expectation(PAULI["Z"]) == pytest.approx(1 - 4 * p / 3, abs=1e-12)
    two = apply_depolarizing(DensityState.zero(2), (0, 1), p)
    assert two.expectation(np.kron(PAULI["Z"], PAULI["I"])) == pytest.approx(1 - 16 * p / 15, abs=1e-12)


@pytest.mark.parametrize("qubits", [(1,), (2, 0), (0, 1, 2)])
@pytest.mark.parametrize("p", [0.0, 0.13, 0.75, 1.0])
def test_depolarizing_matches_pauli_sum(qubits, p):
    rho = random_density(8, np.random.default_rng(7))
    got = apply_depolarizing(DensityState.from_matrix(rho), qubits, p).matrix
    assert np.allclose(got, depolarize_by_sum(rho, 3, list(qubits), p), atol=1e-12)


def test_noise_model_comm_multiplier():
    noise = NoiseModel(0.4, 3.0)
    assert noise.p_comm == 1.0
    assert noise.prob(h(0).with_tag("comm")) == 1.0
    assert noise.prob(h(0)) == 0.4
    assert noise.prob(measure(0, 0)) == 0.0
    with pytest.raises(ValueError):
        NoiseModel(1.5)
    with pytest.raises(ValueError):
        NoiseModel(0.1, -1.0)


def test_projector_observable_expansion():
    obs = ZObservable.projector(2, ["00", "11"])
    assert obs.value_on_distribution({"00": 0.5, "11": 0.5}) == pytest.approx(1.0)
    assert obs.value_on_distribution({"01": 1.0}) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        ZObservable.projector(2, ["0"])


def test_walsh_hadamard_matches_dense():
    v = np.arange(8.0)
    h2 = np.array([[1, 1], [1, -1]])
    dense = np.kron(np.kron(h2, h2), h2)
    assert np.allclose(walsh_hadamard(v), dense @ v)


@settings(max_examples=40, deadline=None)
@given(unitary_circuits(max_qubits=3, max_gates=10))
def test_noiseless_distribution_matches_statevector(c):
    psi = circuit_unitary(c)[:, 0]
    expected = np.abs(psi) ** 2
    for method in ("pauli", "density"):
        got = exact_distribution(c, method=method)
        assert np.allclose([got[b] for b in sorted(got)], expected, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(unitary_circuits(max_qubits=4, max_gates=12), st.floats(0, 0.3), st.floats(0, 2))
def test_pauli_engine_matches_density_engine(c, p, alpha):
    gates = [g.with_tag("comm") if i % 3 == 0 else g for i, g in enumerate(c.gates)]
    c = c.with_gates(gates)
    noise = NoiseModel(p, alpha)
    for obs in (ZObservable.parity(c.num_qubits), ZObservable.single_z(0)):
        a = simulate_exact_expectation(c, noise, obs, method="pauli")
        b = simulate_exact_expectation(c, noise, obs, method="density")
        assert a == pytest.approx(b, abs=1e-10)
    pa = exact_distribution(c, noise, method="pauli")
    pb = exact_distribution(c, noise, method="density")
    assert total_variation(pa, pb) < 1e-10


@pytest.mark.parametrize("alg", ["ghz", "dj", "w"])
def test_engines_agree_on_noisy_lowered_circuits(alg):
    c = generate_benchmark(alg, 3)
    d = lower(c, partition(c, 2))
    noise = NoiseModel(0.02, 1.2)
    pa = exact_distribution(d.circuit, noise, method="pauli")
    pb = exact_distribution(d.circuit, noise, method="density")
    assert total_variation(pa, pb) < 1e-10


def test_reset_and_conditionals_in_density_engine():
    # |1> then reset reads 0; measured |1> drives a conditional X onto a fresh qubit
    c = Circuit(2, 1, [x(0), measure(0, 0), cond("x", 1, 0), reset(0)])
    for method in ("pauli", "density"):
        assert exact_distribution(c, method=method)["01"] == pytest.approx(1.0, abs=1e-12)


def test_feed_forward_validation():
    with pytest.raises(FeedForwardError):
        simulate_exact_expectation(Circuit(2, 1, [cond("x", 1, 0)]), NOISELESS)
    with pytest.raises(FeedForwardError):
        simulate_exact_expectation(Circuit(2, 1, [measure(0, 0), h(0), cond("x", 1, 0)]), NOISELESS)
    with pytest.raises(FeedForwardError):
        simulate_exact_expectation(Circuit(2, 1, [measure(0, 0), measure(1, 0)]), NOISELESS)


def test_capacity_limits():
    c = generate_benchmark("ghz", 14)
    with pytest.raises(CapacityError):
        simulate_exact_expectation(c, NOISELESS)
    assert simulate_exact_expectation(c, NOISELESS, max_qubits=14) == pytest.approx(1.0)
    with pytest.raises(CapacityError):
        simulate_shots(generate_benchmark("ghz", 5), NOISELESS, 10, 0, max_qubits=4)
    with pytest.raises(CapacityError):
        simulate_density(c, NOISELESS)


def test_shot_streams_are_per_shot():
    a = shot_uniforms(5, 3, 10)
    assert np.array_equal(a, shot_uniforms(5, 3, 10))
    assert not np.array_equal(a, shot_uniforms(5, 4, 10))
    assert np.array_equal(shot_uniforms(5, 3, 4), a[:4])


def test_shots_are_reproducible_and_batch_independent(monkeypatch):
    c = lower(generate_benchmark("ghz", 4), partition(generate_benchmark("ghz", 4), 2)).circuit
    noise = NoiseModel(0.05, 1.2)
    r1 = simulate_shots(c, noise, 300, seed=11)
    r2 = simulate_shots(c, noise, 300, seed=11)
    assert r1.counts == r2.counts
    import dqczne.sim.trajectory as traj

    monkeypatch.setattr(traj, "_BATCH_AMPLITUDES", 1 << 9)
    assert simulate_shots(c, noise, 300, seed=11).counts == r1.counts
    assert simulate_shots(c, noise, 300, seed=12).counts != r1.counts


def test_noiseless_shots_only_hit_support():
    c = lower(generate_benchmark("w", 4), partition(generate_benchmark("w", 4), 2)).circuit
    r = simulate_shots(c, NOISELESS, 400, seed=1)
    assert set(r.counts) <= {"1000", "0100", "0010", "0001"}
    assert sum(r.counts.values()) == 400


@pytest.mark.parametrize("alg", ["ghz", "w"])
def test_shot_estimates_agree_with_exact(alg):
    c = generate_benchmark(alg, 3)
    d = lower(c, partition(c, 2)).circuit
    noise = NoiseModel(0.05, 1.1)
    shots = 20000
    exact = exact_distribution(d, noise)
    got = simulate_shots(d, noise, shots, seed=2024).probabilities()
    # 6 sigma per outcome
    for b, p in exact.items():
        sigma = math.sqrt(max(p * (1 - p), 1e-6) / shots)
        assert abs(got.get(b, 0.0) - p) < 6 * sigma + 1e-9


def test_expectation_decays_with_noise():
    c = lower(generate_benchmark("ghz", 4), partition(generate_benchmark("ghz", 4), 2)).circuit
    values = [simulate_exact_expectation(c, NoiseModel(p, 1.2)) for p in (0.0, 0.01, 0.05, 0.2)]
    assert values[0] == pytest.approx(1.0, abs=1e-12)
    assert all(a > b for a, b in zip(values, values[1:]))


def test_rotation_heavy_circuit_uses_full_transfer_matrix():
    c = Circuit(2, 0, [ry(0.7, 0), Gate("rz", (0,), 1.1), ry(0.3, 0), cx(0, 1), ry(-0.4, 1)])
    noise = NoiseModel(0.03)
    a = simulate_exact_expectation(c, noise, ZObservable.single_z(1))
    b = simulate_exact_expectation(c, noise, ZObservable.single_z(1), method="density")
    assert a == pytest.approx(b, abs=1e-12)
