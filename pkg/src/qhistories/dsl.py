"""Line-oriented scenario description language.

Example (the Wigner's-friend circuit)::

    qubits 2
    init q0 = (0.6,0),(0.8,0)     # q1 defaults to |0>
    step
      measure computational on 0 1
    step
      gate CNOT 0 1
      measure computational on 0 1

Statements:

``qubits N``
    Register size; must come first.
``init q<i> = (re,im),(re,im)``
    Single-qubit amplitudes; unlisted qubits start in ``|0>``.
``init state = [ (re,im), ... ]``
    Full ``2^N`` amplitude list (qubit 0 most significant).
``step [statement]``
    Opens a step. A statement may follow on the same line.
``gate NAME wire...``
    ``X Y Z H`` (1 wire), ``CNOT`` (control, target),
    ``U2 <8 reals> w`` and ``U4 <32 reals> w1 w2`` where the reals are
    row-major ``re im`` pairs. Gates in a step compose in file order.
``measure computational on wire...``
    Exactly one measurement per step; measuring a subset of wires gives
    degenerate outcomes.
``measure family NAME [on wire...]``
    A built-in family (see :func:`qhistories.quantum.named_family`).

``#`` starts a comment. Whitespace inside a line is insignificant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import (
    DuplicateWireError,
    InitNormalizationError,
    NonUnitaryGateError,
    QHistoriesError,
    ScenarioSyntaxError,
    UnknownGateError,
    UnknownLabelError,
    WireRangeError,
)
from .histories import Scenario, ScheduleStep
from .linalg import is_unitary
from .quantum import (
    CNOT,
    NAMED_FAMILIES,
    H,
    X,
    Y,
    Z,
    StateVector,
    lift_operator,
    named_family,
    subsystem_family,
)

FIXED_GATES = {"X": X, "Y": Y, "Z": Z, "H": H, "CNOT": CNOT}
MATRIX_GATES = {"U2": 1, "U4": 2}  # name -> wire count

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[()\[\],=])"
    r")"
)


@dataclass(eq=False)
class GateSpec:
    name: str
    wires: tuple[int, ...]
    matrix: np.ndarray | None = None
    line: int = 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, GateSpec):
            return NotImplemented
        if (self.name, tuple(self.wires)) != (other.name, tuple(other.wires)):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is other.matrix
        return bool(np.array_equal(self.matrix, other.matrix))

    def unitary(self) -> np.ndarray:
        return FIXED_GATES[self.name] if self.matrix is None else self.matrix


@dataclass
class MeasureSpec:
    family: str
    wires: tuple[int, ...] | None = None
    line: int = field(default=0, compare=False)


@dataclass
class StepDoc:
    gates: list[GateSpec] = field(default_factory=list)
    measure: MeasureSpec | None = None
    line: int = field(default=0, compare=False)


InitSpec = Union[dict[int, tuple[complex, complex]], list[complex]]


@dataclass
class ScenarioDoc:
    num_qubits: int
    init: InitSpec = field(default_factory=dict)
    steps: list[StepDoc] = field(default_factory=list)

    def initial_state(self) -> StateVector:
        if isinstance(self.init, list):
            return StateVector(np.array(self.init, dtype=complex))
        qubits = [self.init.get(q, (1, 0)) for q in range(self.num_qubits)]
        return StateVector.product(qubits)

    def step_evolution(self, step: StepDoc) -> np.ndarray:
        u = np.eye(1 << self.num_qubits, dtype=complex)
        for g in step.gates:
            u = lift_operator(g.unitary(), g.wires, self.num_qubits) @ u
        return u

    def step_family(self, step: StepDoc):
        m = step.measure
        wires = tuple(range(self.num_qubits)) if m.wires is None else m.wires
        fam = named_family(m.family, len(wires))
        return subsystem_family(fam, wires, self.num_qubits)

    def to_scenario(self) -> Scenario:
        steps = [ScheduleStep(self.step_evolution(s), self.step_family(s)) for s in self.steps]
        return Scenario(self.initial_state(), tuple(steps))


class _Line:
    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        text = text.split("#", 1)[0].rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ScenarioSyntaxError(f"unexpected character {text[col - 1]!r}", lineno, col)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0
        self.end_col = len(text) + 1

    def error(self, msg: str, cls=ScenarioSyntaxError, col: int | None = None):
        if col is None:
            col = self.tokens[self.i][2] if self.i < len(self.tokens) else self.end_col
        return cls(msg, self.lineno, col)

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def peek(self) -> tuple[str, str, int] | None:
        return None if self.at_end() else self.tokens[self.i]

    def take(self, kind: str, what: str) -> tuple[str, int]:
        tok = self.peek()
        if tok is None or tok[0] != kind:
            found = "end of line" if tok is None else repr(tok[1])
            raise self.error(f"expected {what}, found {found}")
        self.i += 1
        return tok[1], tok[2]

    def keyword(self, word: str):
        text, col = self.take("word", repr(word))
        if text != word:
            raise self.error(f"expected {word!r}, found {text!r}", col=col)

    def punct(self, ch: str):
        text, col = self.take("punct", repr(ch))
        if text != ch:
            raise self.error(f"expected {ch!r}, found {text!r}", col=col)

    def number(self) -> float:
        return float(self.take("num", "a number")[0])

    def integer(self, what: str) -> tuple[int, int]:
        text, col = self.take("num", what)
        if not re.fullmatch(r"\d+", text):
            raise self.error(f"expected {what}, found {text!r}", col=col)
        return int(text), col

    def complex_literal(self) -> complex:
        self.punct("(")
        re_ = self.number()
        self.punct(",")
        im = self.number()
        self.punct(")")
        return complex(re_, im)

    def expect_end(self):
        if not self.at_end():
            raise self.error(f"unexpected {self.tokens[self.i][1]!r}")


class _Parser:
    def __init__(self):
        self.doc: ScenarioDoc | None = None
        self.step: StepDoc | None = None

    def wires(self, ln: _Line, count: int | None = None) -> tuple[int, ...]:
        out: list[int] = []
        cols: list[int] = []
        while not ln.at_end() and (count is None or len(out) < count):
            w, col = ln.integer("a wire index")
            if w >= self.doc.num_qubits:
                raise ln.error(f"wire {w} out of range for {self.doc.num_qubits} qubit(s)", WireRangeError, col)
            if w in out:
                raise ln.error(f"duplicate wire {w}", DuplicateWireError, col)
            out.append(w)
            cols.append(col)
        if not out:
            raise ln.error("expected a wire index")
        if count is not None and len(out) != count:
            raise ln.error(f"expected {count} wire(s), found {len(out)}")
        ln.expect_end()
        return tuple(out)

    def statement(self, ln: _Line):
        word, col = ln.take("word", "a statement")
        if self.doc is None and word != "qubits":
            raise ln.error("the file must start with 'qubits N'", col=col)
        handler = getattr(self, f"do_{word}", None)
        if handler is None:
            raise ln.error(f"unknown statement {word!r}", col=col)
        handler(ln, col)

    def do_qubits(self, ln: _Line, col: int):
        if self.doc is not None:
            raise ln.error("'qubits' given twice", col=col)
        n, ncol = ln.integer("a qubit count")
        if n < 1:
            raise ln.error("qubit count must be at least 1", col=ncol)
        ln.expect_end()
        self.doc = ScenarioDoc(n)

    def do_init(self, ln: _Line, col: int):
        if self.step is not None:
            raise ln.error("'init' must precede the first step", col=col)
        target, tcol = ln.take("word", "'state' or q<i>")
        ln.punct("=")
        doc = self.doc
        if target == "state":
            if isinstance(doc.init, list) or doc.init:
                raise ln.error("initial state given more than once", col=col)
            ln.punct("[")
            amps = [ln.complex_literal()]
            while ln.peek() is not None and ln.peek()[1] == ",":
                ln.punct(",")
                amps.append(ln.complex_literal())
            ln.punct("]")
            ln.expect_end()
            if len(amps) != 1 << doc.num_qubits:
                raise ln.error(f"expected {1 << doc.num_qubits} amplitudes, found {len(amps)}", col=tcol)
            norm2 = sum(abs(a) ** 2 for a in amps)
            if abs(norm2 - 1) > 1e-9:
                raise ln.error(f"initial state has squared norm {norm2:.12g}", InitNormalizationError, tcol)
            doc.init = amps
            return
        m = re.fullmatch(r"q(\d+)", target)
        if m is None:
            raise ln.error(f"expected 'state' or q<i>, found {target!r}", col=tcol)
        q = int(m.group(1))
        if q >= doc.num_qubits:
            raise ln.error(f"qubit {q} out of range for {doc.num_qubits} qubit(s)", WireRangeError, tcol)
        if isinstance(doc.init, list) or q in doc.init:
            raise ln.error(f"initial state of q{q} given more than once", col=col)
        a = ln.complex_literal()
        ln.punct(",")
        b = ln.complex_literal()
        ln.expect_end()
        norm2 = abs(a) ** 2 + abs(b) ** 2
        if abs(norm2 - 1) > 1e-9:
            raise ln.error(f"q{q} amplitudes have squared norm {norm2:.12g}", InitNormalizationError, tcol)
        doc.init[q] = (a, b)

    def do_step(self, ln: _Line, col: int):
        self.close_step()
        self.step = StepDoc(line=ln.lineno)
        self.doc.steps.append(self.step)
        if not ln.at_end():
            self.statement(ln)

    def do_gate(self, ln: _Line, col: int):
        if self.step is None:
            raise ln.error("'gate' outside a step", col=col)
        name, ncol = ln.take("word", "a gate name")
        key = name.upper()
        if key in FIXED_GATES:
            arity = FIXED_GATES[key].shape[0].bit_length() - 1
            self.step.gates.append(GateSpec(key, self.wires(ln, arity), line=ln.lineno))
        elif key in MATRIX_GATES:
            k = MATRIX_GATES[key]
            dim = 1 << k
            reals = [ln.number() for _ in range(2 * dim * dim)]
            u = (np.array(reals[0::2]) + 1j * np.array(reals[1::2])).reshape(dim, dim)
            wires = self.wires(ln, k)
            if not is_unitary(u, 1e-10):
                raise ln.error(f"{key} matrix is not unitary", NonUnitaryGateError, ncol)
            self.step.gates.append(GateSpec(key, wires, u, line=ln.lineno))
        else:
            raise ln.error(f"unknown gate {name!r}", UnknownGateError, ncol)

    def do_measure(self, ln: _Line, col: int):
        if self.step is None:
            raise ln.error("'measure' outside a step", col=col)
        if self.step.measure is not None:
            raise ln.error("a step has exactly one 'measure' line", col=col)
        kind, kcol = ln.take("word", "'computational' or 'family'")
        if kind == "computational":
            ln.keyword("on")
            spec = MeasureSpec("computational", self.wires(ln), ln.lineno)
        elif kind == "family":
            name, fcol = ln.take("word", "a family name")
            if name not in NAMED_FAMILIES:
                raise ln.error(f"unknown family {name!r}; expected one of {list(NAMED_FAMILIES)}", col=fcol)
            wires = None
            if not ln.at_end():
                ln.keyword("on")
                wires = self.wires(ln)
            if name == "bell" and len(wires or range(self.doc.num_qubits)) != 2:
                raise ln.error("the bell family acts on exactly 2 wires", col=fcol)
            ln.expect_end()
            spec = MeasureSpec(name, wires, ln.lineno)
        else:
            raise ln.error(f"expected 'computational' or 'family', found {kind!r}", col=kcol)
        self.step.measure = spec

    def close_step(self):
        if self.step is not None and self.step.measure is None:
            raise ScenarioSyntaxError("step has no 'measure' line", self.step.line, 1)


def parse_scenario(text: str) -> ScenarioDoc:
    p = _Parser()
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, 1):
        ln = _Line(raw, lineno)
        if ln.at_end():
            continue
        p.statement(ln)
    if p.doc is None:
        raise ScenarioSyntaxError("empty scenario: expected 'qubits N'", max(len(lines), 1), 1)
    p.close_step()
    try:
        p.doc.to_scenario()
    except (QHistoriesError, UnknownLabelError) as exc:
        raise ScenarioSyntaxError(f"invalid scenario: {exc}", max(len(lines), 1), 1) from exc
    return p.doc


def load_scenario(path) -> ScenarioDoc:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _c(z: complex) -> str:
    return f"({float(z.real)!r},{float(z.imag)!r})"


def format_scenario(doc: ScenarioDoc) -> str:
    """Render a document back to scenario text; floats round-trip exactly."""
    out = [f"qubits {doc.num_qubits}"]
    if isinstance(doc.init, list):
        out.append("init state = [" + ", ".join(_c(a) for a in doc.init) + "]")
    else:
        for q in sorted(doc.init):
            a, b = doc.init[q]
            out.append(f"init q{q} = {_c(complex(a))},{_c(complex(b))}")
    for step in doc.steps:
        out.append("step")
        for g in step.gates:
            parts = ["  gate", g.name]
            if g.matrix is not None:
                parts += [f"{float(x)!r}" for z in g.matrix.ravel() for x in (z.real, z.imag)]
            parts += [str(w) for w in g.wires]
            out.append(" ".join(parts))
        m = step.measure
        if m.family == "computational":
            wires = m.wires if m.wires is not None else range(doc.num_qubits)
            out.append("  measure computational on " + " ".join(map(str, wires)))
        else:
            tail = "" if m.wires is None else " on " + " ".join(map(str, m.wires))
            out.append(f"  measure family {m.family}{tail}")
    return "\n".join(out) + "\n"
