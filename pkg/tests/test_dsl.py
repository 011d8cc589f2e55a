import math
from pathlib import Path

import numpy as np
import pytest

from qhistories import build_wigner_scenario, enumerate_history_vector
from qhistories.dsl import format_scenario, load_scenario, parse_scenario
from qhistories.errors import (
    DuplicateWireError,
    InitNormalizationError,
    NonUnitaryGateError,
    ParseError,
    ScenarioSyntaxError,
    UnknownGateError,
    WireRangeError,
)
from qhistories.linalg import frobenius_close

from corpus import random_state, random_unitary

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

WIGNER = """\
qubits 2
init q0 = (0.6,0),(0.8,0)
step
  measure computational on 0 1
step
  gate CNOT 0 1
  measure computational on 0 1
"""


def scenarios_equivalent(a, b, rng, tol=1e-12):
    if a.num_qubits != b.num_qubits or a.num_steps != b.num_steps:
        return False
    if not a.initial.close_to(b.initial, tol):
        return False
    probe = random_state(a.num_qubits, rng).amplitudes
    for sa, sb in zip(a.steps, b.steps):
        if not frobenius_close(sa.evolution @ probe, sb.evolution @ probe, tol):
            return False
        if sa.measurement.labels != sb.measurement.labels:
            return False
        for lab in sa.measurement:
            if not frobenius_close(sa.measurement.projector(lab) @ probe, sb.measurement.projector(lab) @ probe, tol):
                return False
    return True


def test_wigner_file_matches_builder(rng):
    doc = parse_scenario(WIGNER)
    assert doc.num_qubits == 2
    assert len(doc.steps) == 2
    assert scenarios_equivalent(doc.to_scenario(), build_wigner_scenario(3 / 5, 4 / 5), rng)


def test_shipped_wigner_file(rng):
    sc = load_scenario(SCENARIOS / "wigner.qh").to_scenario()
    assert scenarios_equivalent(sc, build_wigner_scenario(3 / 5, 4 / 5), rng)


def test_trivial_one_history():
    doc = parse_scenario("qubits 1\ninit q0 = (1,0),(0,0)\nstep measure computational on 0\n")
    hv = enumerate_history_vector(doc.to_scenario())
    assert dict(hv) == {("0",): 1}


def test_whitespace_and_comments():
    text = "  qubits   2 # two\ninit q0=( 0.6 , 0 ) ,(0.8,0)\n\nstep\n gate   CNOT 0   1\n measure computational on 0 1 # done\n"
    doc = parse_scenario(text)
    assert doc.init == {0: (0.6 + 0j, 0.8 + 0j)}


def test_full_state_init():
    s = 1 / math.sqrt(2)
    doc = parse_scenario(f"qubits 2\ninit state = [({s},0), (0,0), (0,0), ({s},0)]\nstep\nmeasure computational on 0 1\n")
    hv = enumerate_history_vector(doc.to_scenario())
    assert set(hv) == {("00",), ("11",)}


def test_families_and_subsets():
    doc = parse_scenario("qubits 3\nstep\ngate H 0\nmeasure family parity on 0 1\nstep\nmeasure computational on 2\nstep\nmeasure family x\n")
    sc = doc.to_scenario()
    assert sc.steps[0].measurement.labels == ("even", "odd")
    assert sc.steps[1].measurement.rank("0") == 4
    assert sc.steps[2].measurement.labels[0] == "+++"


def test_u2_gate():
    s = 1 / math.sqrt(2)
    reals = " ".join(str(x) for x in [s, 0, s, 0, s, 0, -s, 0])
    doc = parse_scenario(f"qubits 1\nstep\ngate U2 {reals} 0\nmeasure computational on 0\n")
    hv = enumerate_history_vector(doc.to_scenario())
    assert all(abs(abs(a) - s) < 1e-12 for a in hv.values())


@pytest.mark.parametrize(
    "text,cls,line,column",
    [
        ("qubits 2\nstep\ngate CNOT 0 0\nmeasure computational on 0 1\n", DuplicateWireError, 3, 13),
        ("qubits 2\nstep\ngate X 2\nmeasure computational on 0\n", WireRangeError, 3, 8),
        ("qubits 2\nstep\ngate FOO 0\nmeasure computational on 0\n", UnknownGateError, 3, 6),
        ("qubits 1\nstep\ngate U2 1 0 1 0 0 0 1 0 0\nmeasure computational on 0\n", NonUnitaryGateError, 3, 6),
        ("qubits 1\ninit q0 = (0.6,0),(0.6,0)\n", InitNormalizationError, 2, 6),
        ("qubits 1\ninit state = [(1,0),(1,0)]\n", InitNormalizationError, 2, 6),
        ("qubits 1\ninit q3 = (1,0),(0,0)\n", WireRangeError, 2, 6),
        ("qubits 1\nstep\ngate X 0\n", ScenarioSyntaxError, 2, 1),
        ("qubits 1\nstep\nmeasure computational on 0\nmeasure computational on 0\n", ScenarioSyntaxError, 4, 1),
        ("gate X 0\n", ScenarioSyntaxError, 1, 1),
        ("qubits 1\ngate X 0\n", ScenarioSyntaxError, 2, 1),
        ("qubits 1\nstep\nmeasure computational 0\n", ScenarioSyntaxError, 3, 23),
        ("qubits 1\nstep\nmeasure family nope\n", ScenarioSyntaxError, 3, 16),
        ("qubits 1\ninit q0 = (1,0) (0,0)\n", ScenarioSyntaxError, 2, 17),
        ("qubits 1\ninit q0 = (1;0),(0,0)\n", ScenarioSyntaxError, 2, 13),
        ("", ScenarioSyntaxError, 1, 1),
        ("qubits 2\nqubits 2\n", ScenarioSyntaxError, 2, 1),
    ],
)
def test_errors_have_category_and_position(text, cls, line, column):
    with pytest.raises(cls) as info:
        parse_scenario(text)
    err = info.value
    assert isinstance(err, ParseError)
    assert (err.line, err.column) == (line, column)
    assert err.category in str(err)


def test_error_categories_distinct():
    cats = {c.category for c in (ScenarioSyntaxError, UnknownGateError, NonUnitaryGateError, InitNormalizationError, WireRangeError, DuplicateWireError)}
    assert len(cats) == 6


@pytest.mark.parametrize("seed", range(10))
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    lines = [f"qubits {n}"]
    if rng.random() < 0.5:
        amps = random_state(n, rng).amplitudes
        lines.append("init state = [" + ", ".join(f"({float(a.real)!r},{float(a.imag)!r})" for a in amps) + "]")
    else:
        for q in range(n):
            a = random_state(1, rng).amplitudes
            lines.append(f"init q{q} = ({float(a[0].real)!r},{float(a[0].imag)!r}),({float(a[1].real)!r},{float(a[1].imag)!r})")
    for _ in range(int(rng.integers(0, 4))):
        lines.append("step")
        u = random_unitary(2, rng)
        lines.append("gate U2 " + " ".join(repr(float(x)) for z in u.ravel() for x in (z.real, z.imag)) + f" {rng.integers(n)}")
        if n >= 2:
            w = rng.permutation(n)[:2]
            lines.append(f"gate CNOT {w[0]} {w[1]}")
            u4 = random_unitary(4, rng)
            lines.append("gate U4 " + " ".join(repr(float(x)) for z in u4.ravel() for x in (z.real, z.imag)) + f" {w[1]} {w[0]}")
        lines.append("gate H 0")
        lines.append(rng.choice(["measure computational on 0", "measure family parity", f"measure computational on {' '.join(map(str, range(n)))}"]))
    doc = parse_scenario("\n".join(lines) + "\n")
    text = format_scenario(doc)
    again = parse_scenario(text)
    assert again == doc
    assert format_scenario(again) == text
    assert scenarios_equivalent(doc.to_scenario(), again.to_scenario(), rng, 1e-12)
