import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqczne.circuit import (
    CCX,
    COMM,
    Circuit,
    CircuitError,
    Gate,
    NoAdjointError,
    adjoint,
    ccx,
    cond,
    cx,
    decompose_toffoli,
    depth,
    generate_benchmark,
    h,
    measure,
    reset,
    ry,
    rz,
    t,
    tdg,
    x,
)
from dqczne.sim import circuit_unitary, exact_distribution

from conftest import unitary_circuits, unitary_gates


def test_gate_validation():
    with pytest.raises(CircuitError):
        Gate("cx", (0, 0))
    with pytest.raises(CircuitError):
        Gate("h", (0, 1))
    with pytest.raises(CircuitError):
        Gate("rz", (0,))
    with pytest.raises(CircuitError):
        Gate("h", (0,), angle=0.1)
    with pytest.raises(CircuitError):
        Gate("rz", (0,), angle=math.inf)
    with pytest.raises(CircuitError):
        Gate("measure", (0,))
    with pytest.raises(CircuitError):
        Gate("cond", (0,), clbit=0, inner="h")
    with pytest.raises(CircuitError):
        Gate("swap", (0, 1))
    with pytest.raises(CircuitError):
        h(0).with_tag("remote")


def test_circuit_validation():
    with pytest.raises(CircuitError):
        Circuit(2, 0, [cx(0, 2)])
    with pytest.raises(CircuitError):
        Circuit(1, 0, [measure(0, 0)])
    with pytest.raises(CircuitError):
        Circuit(2, data_qubits=(0, 0))
    assert Circuit(3).data_qubits == (0, 1, 2)


def test_count_by_kind_and_tag():
    c = Circuit(2, 0, [h(0), cx(0, 1, tag=COMM), cx(0, 1)])
    assert c.count("cx") == 2
    assert c.count(tag=COMM) == 1
    assert c.strip_tags().count(tag=COMM) == 0


def test_adjoint_pairs():
    assert adjoint(t(0)) == tdg(0)
    assert adjoint(tdg(0)) == t(0)
    assert adjoint(rz(0.3, 1)).angle == -0.3
    assert adjoint(cx(0, 1)) == cx(0, 1)
    for g in (measure(0, 0), reset(0), cond("x", 0, 0)):
        with pytest.raises(NoAdjointError):
            adjoint(g)


@given(unitary_gates(3))
def test_adjoint_involution_and_inverse(g):
    assert adjoint(adjoint(g)) == g
    c = Circuit(3, 0, [g, adjoint(g)])
    assert np.allclose(circuit_unitary(c), np.eye(8), atol=1e-12)


def test_depth_examples():
    assert depth(Circuit(3)) == 0
    assert depth(generate_benchmark("ghz", 4)) == 4
    assert depth(Circuit(3, 0, [h(0), h(1), h(2)])) == 1
    # a conditional waits for the measurement that writes its bit
    c = Circuit(2, 1, [h(0), measure(0, 0), cond("x", 1, 0)])
    assert depth(c) == 3


@given(unitary_circuits(max_qubits=4, max_gates=15))
def test_depth_bounds(c):
    per_qubit = max(sum(q in g.qubits for g in c.gates) for q in range(c.num_qubits))
    assert per_qubit <= depth(c) <= len(c)


def test_toffoli_decomposition_matches_ccx():
    for qubits in [(0, 1, 2), (2, 0, 1), (1, 2, 0)]:
        c = Circuit(3, 0, [ccx(*qubits)])
        d = decompose_toffoli(c)
        assert len(d) == 15
        assert d.count(CCX) == 0
        assert np.allclose(circuit_unitary(d), circuit_unitary(c), atol=1e-12)


def test_toffoli_decomposition_keeps_tag_and_context():
    c = Circuit(3, 0, [h(0), Gate("ccx", (0, 1, 2), tag=COMM), x(2)])
    d = decompose_toffoli(c)
    assert len(d) == 17
    assert d.count(tag=COMM) == 15
    assert decompose_toffoli(Circuit(1, 0, [h(0)])) == Circuit(1, 0, [h(0)])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_ghz_distribution(n):
    dist = exact_distribution(generate_benchmark("ghz", n))
    assert dist["0" * n] == pytest.approx(0.5, abs=1e-12)
    assert dist["1" * n] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_w_state_distribution(n):
    dist = exact_distribution(generate_benchmark("w", n))
    for b, p in dist.items():
        expected = 1 / n if b.count("1") == 1 else 0.0
        assert p == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_deutsch_jozsa(n):
    balanced = generate_benchmark("dj", n)
    assert balanced.num_qubits == n + 1
    assert balanced.data_qubits == tuple(range(n))
    assert exact_distribution(balanced)["1" * n] == pytest.approx(1.0, abs=1e-12)
    constant = generate_benchmark("dj", n, oracle="constant")
    assert exact_distribution(constant)["0" * n] == pytest.approx(1.0, abs=1e-12)


def test_benchmark_errors():
    with pytest.raises(CircuitError):
        generate_benchmark("ghz", 1)
    with pytest.raises(CircuitError):
        generate_benchmark("qft", 4)
    with pytest.raises(CircuitError):
        generate_benchmark("dj", 3, oracle="random")


@settings(max_examples=30)
@given(unitary_circuits(max_qubits=3), st.lists(st.integers(0, 2), min_size=3, max_size=3, unique=True))
def test_remap_is_permutation(c, perm):
    if c.num_qubits < 3:
        return
    mapped = Circuit(3, 0, [g.remap(perm) for g in c.gates])
    assert len(mapped) == len(c)
    assert depth(mapped) == depth(c)


def test_rotations_are_angle_faithful():
    u = circuit_unitary(Circuit(1, 0, [ry(math.pi, 0)]))
    assert np.allclose(u, [[0, -1], [1, 0]], atol=1e-12)
    u = circuit_unitary(Circuit(1, 0, [rz(math.pi / 2, 0)]))
    assert np.allclose(u, np.diag([np.exp(-0.25j * math.pi), np.exp(0.25j * math.pi)]))
