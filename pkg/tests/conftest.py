from __future__ import annotations

import math

import numpy as np
from hypothesis import strategies as st

from dqczne.circuit import CX, H, RY, RZ, T, TDG, X, Z, Circuit, Gate

ONE_QUBIT_KINDS = (H, X, Z, T, TDG, RZ, RY)
angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


@st.composite
def unitary_gates(draw, n: int) -> Gate:
    if n >= 2 and draw(st.booleans()):
        a, b = draw(st.permutations(range(n)))[:2]
        return Gate(CX, (a, b))
    kind = draw(st.sampled_from(ONE_QUBIT_KINDS))
    q = draw(st.integers(0, n - 1))
    angle = draw(angles) if kind in (RZ, RY) else None
    return Gate(kind, (q,), angle)


@st.composite
def unitary_circuits(draw, min_qubits: int = 1, max_qubits: int = 3, min_gates: int = 1, max_gates: int = 12):
    n = draw(st.integers(min_qubits, max_qubits))
    gates = draw(st.lists(unitary_gates(n), min_size=min_gates, max_size=max_gates))
    return Circuit(n, 0, gates)


@st.composite
def interaction_edges(draw, max_nodes: int = 10):
    n = draw(st.integers(1, max_nodes))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=25)) if pairs else []
    return n, edges


def allclose_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-12) -> bool:
    idx = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[idx]) < 1e-15:
        return False
    phase = v[idx] / u[idx]
    return abs(abs(phase) - 1) < atol and np.allclose(u * phase, v, atol=atol)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, passed: bool, detail: str) -> None:
    line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split(":")[0]):
            terminalreporter.write_line(line)
