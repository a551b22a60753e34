import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqczne.circuit import COMM, Circuit, ccx, cond, cx, generate_benchmark, h, measure, reset, rz
from dqczne.distribute import lower
from dqczne.partition import partition
from dqczne.qasm import QasmError, check_qasm, emit_qasm, parse_qasm

from conftest import unitary_circuits

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def test_parse_basic_program():
    src = HEADER + """
qreg q[3];
creg c[2];
h q[0];
cx q[0],q[1];
rz(pi/4) q[2];
ccx q[0],q[1],q[2];
measure q[0] -> c[0];
reset q[1];
"""
    c = parse_qasm(src)
    assert c.num_qubits == 3 and c.num_clbits == 2
    assert [g.kind for g in c.gates] == ["h", "cx", "rz", "ccx", "measure", "reset"]
    assert c.gates[2].angle == pytest.approx(math.pi / 4)


def test_parameter_expressions():
    src = HEADER + "qreg q[1];\nry(-(pi^2)/4 + 2*0.5 - 1e-1) q[0];\nrz(-pi) q[0];\n"
    c = parse_qasm(src)
    assert c.gates[0].angle == pytest.approx(-(math.pi**2) / 4 + 1 - 0.1)
    assert c.gates[1].angle == pytest.approx(-math.pi)


def test_conditionals_and_comm_tags():
    src = HEADER + """qreg q[2];
creg a[1];
creg b[1];
h q[0]; // comm
measure q[0] -> b[0];
if(b==1) x q[1];
if(a==1) z q[1];
"""
    c = parse_qasm(src)
    assert c.gates[0].tag == COMM
    assert c.gates[1].clbit == 1
    assert (c.gates[2].inner, c.gates[2].clbit) == ("x", 1)
    assert (c.gates[3].inner, c.gates[3].clbit) == ("z", 0)


@pytest.mark.parametrize(
    "src, fragment",
    [
        ("qreg q[1];", "OPENQASM"),
        ("OPENQASM 3.0;\nqreg q[1];", "2.0"),
        (HEADER + "qreg q[2];\ncx q[0],q[5];", "out of range"),
        (HEADER + "qreg q[2];\nfoo q[0];", "foo"),
        (HEADER + "qreg q[2];\nh q[0]", "';'"),
        (HEADER + "qreg q[1];\nrz(1/0) q[0];", ""),
        (HEADER + "qreg q[2];\ncx q[0],q[0];", ""),
    ],
)
def test_diagnostics(src, fragment):
    c, diags = check_qasm(src)
    assert c is None and diags
    assert all(d.line >= 1 and d.column >= 1 for d in diags)
    assert fragment in " ".join(d.message for d in diags)
    with pytest.raises(QasmError):
        parse_qasm(src)


def test_error_recovery_reports_every_bad_statement():
    src = HEADER + "qreg q[2];\nfoo q[0];\nh q[9];\nbar;\nh q[1];\n"
    _, diags = check_qasm(src)
    assert [d.line for d in diags] == [4, 5, 6]


def test_invalid_utf8_is_a_diagnostic():
    c, diags = check_qasm(b"OPENQASM 2.0;\n\xff\xfe")
    assert c is None
    assert diags[0].line == 2


def test_emit_is_deterministic_text():
    c = Circuit(2, 1, [h(0), cx(0, 1, tag=COMM), rz(math.pi / 4, 1), measure(1, 0)])
    assert emit_qasm(c) == (
        HEADER
        + "qreg q[2];\ncreg c[1];\nh q[0];\ncx q[0],q[1]; // comm\n"
        + "rz(0.7853981633974483) q[1];\nmeasure q[1] -> c[0];\n"
    )


def _pipeline_circuits():
    for alg in ("ghz", "dj", "w"):
        for n in (2, 4, 5):
            c = generate_benchmark(alg, n)
            yield c
            for k in range(1, min(n, 3) + 1):
                a = partition(c, k)
                for mode in ("roundtrip", "migrate"):
                    for scope in ("bell_only", "whole_template"):
                        yield lower(c, a, mode, scope).circuit


def test_round_trip_on_pipeline_circuits():
    for c in _pipeline_circuits():
        assert parse_qasm(emit_qasm(c)) == c


def test_round_trip_keeps_toffoli_and_reset():
    c = Circuit(3, 1, [ccx(0, 1, 2), reset(2), measure(0, 0), cond("z", 1, 0)], data_qubits=(2, 0))
    assert parse_qasm(emit_qasm(c)) == c


@given(unitary_circuits(max_qubits=5, max_gates=20))
def test_round_trip_random_unitary_circuits(c):
    assert parse_qasm(emit_qasm(c)) == c


@settings(max_examples=300)
@given(st.binary(max_size=200))
def test_random_bytes_never_crash(data):
    c, diags = check_qasm(data)
    assert (c is None) == bool(diags)


@settings(max_examples=300)
@given(st.text(alphabet="OPENQASM2.0;qregc[]hx()pi+-*/^ ,->measureif=\n//", max_size=120))
def test_token_soup_never_crashes(text):
    check_qasm(HEADER + text)
