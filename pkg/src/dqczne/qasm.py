"""OpenQASM 2.0 subset reader and writer.

Accepted statements::

    OPENQASM 2.0;
    include "qelib1.inc";          (accepted, ignored)
    qreg q[N];                     (exactly one)
    creg c[M];                     (any number; bits are numbered in declaration order)
    h|x|z|t|tdg q[i];
    rz(expr)|ry(expr) q[i];
    cx q[i],q[j];  ccx q[i],q[j],q[k];
    measure q[i] -> c[j];
    reset q[i];
    if(c==1) x|z q[i];             (c must be a 1-bit register)

A trailing ``// comm`` comment marks the statement's gate as a communication
gate and a ``// dqczne:data i,j,...`` comment line fixes the readout qubits,
so that ``parse_qasm(emit_qasm(c)) == c`` holds exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator

from .circuit import (
    CCX,
    COMM,
    COND,
    CX,
    LOCAL,
    MEASURE,
    RESET,
    ROTATIONS,
    SINGLE_QUBIT,
    Circuit,
    CircuitError,
    Gate,
)

_GATE_NAMES = {k: k for k in SINGLE_QUBIT | {CX, CCX}}
_DATA_PRAGMA = "dqczne:data"


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class QasmError(ValueError):
    """Raised by :func:`parse_qasm`; carries every diagnostic collected."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        head = "; ".join(str(d) for d in diagnostics[:5])
        more = f" (+{len(diagnostics) - 5} more)" if len(diagnostics) > 5 else ""
        super().__init__(f"{len(diagnostics)} QASM error(s): {head}{more}")


@dataclass(frozen=True)
class _Tok:
    kind: str  # id, num, str, sym, comment, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<sym>->|==|[;,\[\]()+\-*/^{}])
    """,
    re.VERBOSE | re.ASCII,
)


def _tokenize(text: str, diags: list[ParseDiagnostic]) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            diags.append(ParseDiagnostic(line, col, f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Skip(Exception):
    """Abort the current statement; the diagnostic is already recorded."""


class _Parser:
    def __init__(self, text: str):
        self.diags: list[ParseDiagnostic] = []
        all_toks = _tokenize(text, self.diags)
        self.toks = [t for t in all_toks if t.kind != "comment"]
        # comment tokens keyed by line, for trailing "// comm" and pragmas
        self.comments: dict[int, str] = {}
        self.pragma_lines: list[_Tok] = []
        for t in all_toks:
            if t.kind == "comment":
                body = t.text[2:].strip()
                self.comments[t.line] = body
                if body.startswith(_DATA_PRAGMA):
                    self.pragma_lines.append(t)
        self.i = 0
        self.qreg: tuple[str, int] | None = None
        self.cregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.num_clbits = 0
        self.gates: list[Gate] = []
        self.seen_header = False
        self.data_qubits: tuple[int, ...] | None = None

    # -- token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, tok: _Tok, message: str) -> _Skip:
        self.diags.append(ParseDiagnostic(tok.line, tok.col, message))
        return _Skip()

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect_sym(self, sym: str) -> _Tok:
        t = self.tok
        if t.kind != "sym" or t.text != sym:
            raise self.error(t, f"expected '{sym}', found {self._describe(t)}")
        return self.advance()

    def expect_id(self, what: str = "identifier") -> _Tok:
        t = self.tok
        if t.kind != "id":
            raise self.error(t, f"expected {what}, found {self._describe(t)}")
        return self.advance()

    def expect_int(self) -> tuple[int, _Tok]:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise self.error(t, f"expected integer, found {self._describe(t)}")
        self.advance()
        return int(t.text), t

    @staticmethod
    def _describe(t: _Tok) -> str:
        return "end of input" if t.kind == "eof" else f"'{t.text}'"

    def recover(self) -> None:
        while self.tok.kind != "eof":
            t = self.advance()
            if t.kind == "sym" and t.text == ";":
                return

    # -- grammar
    def parse(self) -> Circuit | None:
        while self.tok.kind != "eof":
            start = self.i
            try:
                self.statement()
            except _Skip:
                if self.i == start or not (self.toks[self.i - 1].text == ";"):
                    self.recover()
        self.apply_pragmas()
        if self.qreg is None and not self.diags:
            self.diags.append(ParseDiagnostic(self.tok.line, self.tok.col, "missing qreg declaration"))
        if not self.seen_header and not any("OPENQASM" in d.message for d in self.diags):
            self.diags.append(ParseDiagnostic(1, 1, "missing 'OPENQASM 2.0;' header"))
        if self.diags:
            return None
        try:
            return Circuit(self.qreg[1], self.num_clbits, self.gates, data_qubits=self.data_qubits)
        except CircuitError as exc:  # defensive: checks above should make this unreachable
            self.diags.append(ParseDiagnostic(1, 1, str(exc)))
            return None

    def apply_pragmas(self) -> None:
        for t in self.pragma_lines:
            rest = self.comments[t.line][len(_DATA_PRAGMA):].strip()
            try:
                qs = tuple(int(s) for s in rest.split(",")) if rest else ()
            except ValueError:
                self.diags.append(ParseDiagnostic(t.line, t.col, "malformed data-qubit pragma"))
                continue
            n = self.qreg[1] if self.qreg else 0
            if any(not 0 <= q < n for q in qs) or len(set(qs)) != len(qs):
                self.diags.append(ParseDiagnostic(t.line, t.col, "data-qubit pragma out of range"))
                continue
            self.data_qubits = qs

    def statement(self) -> None:
        t = self.tok
        if t.kind != "id":
            self.advance()
            raise self.error(t, f"expected statement, found {self._describe(t)}")
        word = t.text
        if word == "OPENQASM":
            self.header()
            return
        if not self.seen_header:
            self.advance()
            raise self.error(t, "expected 'OPENQASM 2.0;' header before other statements")
        if word == "include":
            self.advance()
            s = self.tok
            if s.kind != "str":
                raise self.error(s, f"expected file name string, found {self._describe(s)}")
            self.advance()
            if s.text != '"qelib1.inc"':
                self.expect_sym(";")
                raise self.error(s, f"include of {s.text} is not supported (only qelib1.inc)")
            self.expect_sym(";")
        elif word == "qreg":
            self.qreg_decl()
        elif word == "creg":
            self.creg_decl()
        elif word == "measure":
            self.measure()
        elif word == "reset":
            self.advance()
            q = self.qubit_arg()
            end = self.expect_sym(";")
            self.emit(Gate(RESET, (q,)), end)
        elif word == "if":
            self.conditional()
        elif word in _GATE_NAMES:
            self.gate_call()
        elif word in ("gate", "opaque"):
            self.advance()
            raise self.error(t, "gate definitions are not supported")
        elif word == "barrier":
            self.advance()
            raise self.error(t, "barrier is not supported")
        else:
            self.advance()
            raise self.error(t, f"unsupported statement or gate '{word}'")

    def header(self) -> None:
        t = self.advance()
        if self.seen_header or self.gates or self.qreg:
            raise self.error(t, "OPENQASM header must appear once, first")
        v = self.tok
        if v.kind != "num" or v.text not in ("2.0", "2"):
            raise self.error(v, f"unsupported OPENQASM version {self._describe(v)}; expected 2.0")
        self.advance()
        self.expect_sym(";")
        self.seen_header = True

    def qreg_decl(self) -> None:
        t = self.advance()
        name = self.expect_id("register name")
        self.expect_sym("[")
        size, size_tok = self.expect_int()
        self.expect_sym("]")
        self.expect_sym(";")
        if self.qreg is not None:
            raise self.error(t, "only one qreg is supported")
        if name.text in self.cregs:
            raise self.error(name, f"register '{name.text}' already declared")
        if size < 1:
            raise self.error(size_tok, "qreg size must be positive")
        if self.gates:
            raise self.error(t, "qreg must be declared before any gate")
        self.qreg = (name.text, size)

    def creg_decl(self) -> None:
        self.advance()
        name = self.expect_id("register name")
        self.expect_sym("[")
        size, size_tok = self.expect_int()
        self.expect_sym("]")
        self.expect_sym(";")
        if name.text in self.cregs or (self.qreg and self.qreg[0] == name.text):
            raise self.error(name, f"register '{name.text}' already declared")
        if size < 1:
            raise self.error(size_tok, "creg size must be positive")
        self.cregs[name.text] = (self.num_clbits, size)
        self.num_clbits += size

    def indexed(self) -> tuple[_Tok, int, _Tok]:
        name = self.expect_id("register reference")
        if self.tok.kind == "sym" and self.tok.text == "[":
            self.advance()
            idx, idx_tok = self.expect_int()
            self.expect_sym("]")
            return name, idx, idx_tok
        raise self.error(name, f"register '{name.text}' must be indexed (broadcast is not supported)")

    def qubit_arg(self) -> int:
        name, idx, idx_tok = self.indexed()
        if self.qreg is None:
            raise self.error(name, "qreg not declared before use")
        if name.text != self.qreg[0]:
            raise self.error(name, f"unknown quantum register '{name.text}'")
        if idx >= self.qreg[1]:
            raise self.error(idx_tok, "qubit index out of range")
        return idx

    def clbit_arg(self) -> int:
        name, idx, idx_tok = self.indexed()
        if name.text not in self.cregs:
            raise self.error(name, f"unknown classical register '{name.text}'")
        offset, size = self.cregs[name.text]
        if idx >= size:
            raise self.error(idx_tok, "classical bit index out of range")
        return offset + idx

    def emit(self, gate: Gate, end_tok: _Tok) -> None:
        if self.comments.get(end_tok.line) == "comm":
            gate = gate.with_tag(COMM)
        self.gates.append(gate)

    def measure(self) -> None:
        self.advance()
        q = self.qubit_arg()
        self.expect_sym("->")
        c = self.clbit_arg()
        end = self.expect_sym(";")
        self.emit(Gate(MEASURE, (q,), clbit=c), end)

    def conditional(self) -> None:
        self.advance()
        self.expect_sym("(")
        reg = self.expect_id("classical register")
        self.expect_sym("==")
        value, value_tok = self.expect_int()
        self.expect_sym(")")
        op = self.expect_id("gate name")
        q = self.qubit_arg()
        end = self.expect_sym(";")
        if reg.text not in self.cregs:
            raise self.error(reg, f"unknown classical register '{reg.text}'")
        offset, size = self.cregs[reg.text]
        if size != 1:
            raise self.error(reg, "conditionals require a 1-bit classical register")
        if value != 1:
            raise self.error(value_tok, "only ==1 conditions are supported")
        if op.text not in ("x", "z"):
            raise self.error(op, f"conditional gate must be x or z, not '{op.text}'")
        self.emit(Gate(COND, (q,), clbit=offset, inner=op.text), end)

    def gate_call(self) -> None:
        name = self.advance()
        kind = _GATE_NAMES[name.text]
        angle = None
        if kind in ROTATIONS:
            self.expect_sym("(")
            angle = self.expr()
            self.expect_sym(")")
        elif self.tok.kind == "sym" and self.tok.text == "(":
            raise self.error(self.tok, f"gate '{name.text}' takes no parameters")
        qubits = [self.qubit_arg()]
        while self.tok.kind == "sym" and self.tok.text == ",":
            self.advance()
            qubits.append(self.qubit_arg())
        end = self.expect_sym(";")
        arity = 3 if kind == CCX else 2 if kind == CX else 1
        if len(qubits) != arity:
            raise self.error(name, f"gate '{name.text}' expects {arity} qubit argument(s), got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise self.error(name, f"gate '{name.text}' has repeated qubit arguments")
        self.emit(Gate(kind, tuple(qubits), angle=angle), end)

    # -- parameter expressions: + - * / ^, unary minus, pi, numbers, parentheses
    def expr(self) -> float:
        start = self.tok
        value = self._sum()
        if not math.isfinite(value):
            raise self.error(start, "parameter is not a finite number")
        return value

    def _sum(self) -> float:
        v = self._prod()
        while self.tok.kind == "sym" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self._prod()
            v = v + rhs if op == "+" else v - rhs
        return v

    def _prod(self) -> float:
        v = self._power()
        while self.tok.kind == "sym" and self.tok.text in "*/":
            op = self.advance()
            rhs = self._power()
            if op.text == "/":
                if rhs == 0:
                    raise self.error(op, "division by zero in parameter")
                v = v / rhs
            else:
                v = v * rhs
        return v

    def _power(self) -> float:
        base = self._unary()
        if self.tok.kind == "sym" and self.tok.text == "^":
            op = self.advance()
            exp = self._power()
            try:
                return float(base**exp)
            except (OverflowError, ZeroDivisionError):
                raise self.error(op, "invalid power in parameter") from None
        return base

    def _unary(self) -> float:
        if self.tok.kind == "sym" and self.tok.text in "+-":
            sign = -1.0 if self.advance().text == "-" else 1.0
            return sign * self._unary()
        return self._atom()

    def _atom(self) -> float:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return float(t.text)
        if t.kind == "id" and t.text == "pi":
            self.advance()
            return math.pi
        if t.kind == "sym" and t.text == "(":
            self.advance()
            v = self._sum()
            self.expect_sym(")")
            return v
        raise self.error(t, f"expected number, 'pi' or '(' in parameter, found {self._describe(t)}")


def _decode(text: str | bytes) -> tuple[str | None, list[ParseDiagnostic]]:
    if isinstance(text, str):
        return text, []
    try:
        return text.decode("utf-8"), []
    except UnicodeDecodeError as exc:
        prefix = text[: exc.start]
        line = prefix.count(b"\n") + 1
        col = exc.start - (prefix.rfind(b"\n") + 1) + 1
        return None, [ParseDiagnostic(line, col, "input is not valid UTF-8")]


def check_qasm(text: str | bytes) -> tuple[Circuit | None, list[ParseDiagnostic]]:
    """Parse without raising: returns ``(circuit, [])`` or ``(None, diagnostics)``."""
    decoded, diags = _decode(text)
    if decoded is None:
        return None, diags
    parser = _Parser(decoded)
    circuit = parser.parse()
    diags = sorted(parser.diags, key=lambda d: (d.line, d.column))
    return (circuit, []) if circuit is not None and not diags else (None, diags)


def parse_qasm(text: str | bytes) -> Circuit:
    """Parse the supported OpenQASM 2.0 subset; raises :class:`QasmError`."""
    circuit, diags = check_qasm(text)
    if circuit is None:
        raise QasmError(diags)
    return circuit


def _fmt_angle(a: float) -> str:
    return repr(float(a))


def _lines(c: Circuit) -> Iterator[str]:
    yield "OPENQASM 2.0;"
    yield 'include "qelib1.inc";'
    if c.num_qubits:
        yield f"qreg q[{c.num_qubits}];"
    per_bit = any(g.kind == COND for g in c.gates)
    if c.num_clbits:
        if per_bit:
            for i in range(c.num_clbits):
                yield f"creg c{i}[1];"
        else:
            yield f"creg c[{c.num_clbits}];"
    if c.data_qubits != tuple(range(c.num_qubits)):
        yield f"// {_DATA_PRAGMA} " + ",".join(str(q) for q in c.data_qubits)

    def bit(i: int) -> str:
        return f"c{i}[0]" if per_bit else f"c[{i}]"

    for g in c.gates:
        qs = ",".join(f"q[{q}]" for q in g.qubits)
        if g.kind == MEASURE:
            s = f"measure {qs} -> {bit(g.clbit)};"
        elif g.kind == RESET:
            s = f"reset {qs};"
        elif g.kind == COND:
            s = f"if(c{g.clbit}==1) {g.inner} {qs};"
        elif g.kind in ROTATIONS:
            s = f"{g.kind}({_fmt_angle(g.angle)}) {qs};"
        else:
            s = f"{g.kind} {qs};"
        yield s + (" // comm" if g.tag == COMM else "")


def emit_qasm(c: Circuit) -> str:
    """Deterministic QASM text for ``c``.

    Circuits containing conditionals get one 1-bit ``creg`` per classical
    bit, since OpenQASM 2.0 conditions compare a whole register.
    """
    if c.num_qubits == 0:
        raise CircuitError("cannot emit a circuit without qubits")
    return "\n".join(_lines(c)) + "\n"


__all__ = ["ParseDiagnostic", "QasmError", "check_qasm", "emit_qasm", "parse_qasm", "LOCAL", "COMM"]
