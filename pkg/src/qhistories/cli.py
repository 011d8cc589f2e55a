"""Command-line interface: ``qhistories <command> ...``.

Exit codes: 0 ok, 2 parse/usage error, 3 impossible outcome, 4 statistical
failure, 5 invariant violation.
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dsl import load_scenario
from .errors import (
    ImpossibleOutcomeError,
    InvalidWireError,
    ParseError,
    QHistoriesError,
    ZeroProbabilityError,
)
from .histories import (
    DEFAULT_PRUNE_TOL,
    HistoryVector,
    collapse_on_outcome,
    enumerate_history_vector,
    evolved_density,
    marginal_probability,
)
from .quantum import partial_trace
from .sampling import Z_BOUND, compare_to_engine, sample_histories
from .wigner import run_wigner_report

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_IMPOSSIBLE = 3
EXIT_STATISTICAL = 4
EXIT_INVARIANT = 5


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """12 significant digits; lowercase scientific below 1e-4."""
    if x == 0:
        return "0"
    return f"{x:.12g}"


def fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return fmt(z.real)
    if z.real == 0:
        return f"{fmt(z.imag)}j"
    sign = "+" if z.imag > 0 else "-"
    return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}j"


def _num(x: float) -> float:
    return 0.0 if x == 0 else float(x)


def complex_json(z: complex) -> list[float]:
    return [_num(z.real), _num(z.imag)]


def matrix_json(m: np.ndarray) -> list:
    return [[complex_json(z) for z in row] for row in m]


def histories_json(hv: HistoryVector) -> list[dict]:
    return [
        {"labels": list(h), "amplitude": complex_json(a), "probability": abs(a) ** 2}
        for h, a in hv.items()
    ]


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header, *rows]]


def history_table(hv: HistoryVector) -> list[str]:
    rows = [
        [",".join(h) or "()", fmt(a.real), fmt(a.imag), fmt(abs(a) ** 2)]
        for h, a in hv.items()
    ]
    return _table(["history", "amplitude.re", "amplitude.im", "probability"], rows)


@dataclass(frozen=True)
class RenderedHistoryDiagram:
    lines: list[str]

    def __str__(self) -> str:
        return "\n".join(self.lines)


def render_history_diagram(hv: HistoryVector) -> RenderedHistoryDiagram:
    """One row per history, e.g. ``10 → 11  |A|=0.800``."""
    n = hv.num_steps
    widths = [max(len(h[i]) for h in hv) for i in range(n)]
    lines = []
    for h, a in hv.items():
        path = " → ".join(lab.ljust(w) for lab, w in zip(h, widths)) if n else "()"
        lines.append(f"{path}  |A|={abs(a):.3f}")
    return RenderedHistoryDiagram(lines)


def _emit(args, payload: dict, lines: list[str]):
    if args.json:
        print(json.dumps(payload, indent=2, allow_nan=False))
    else:
        print("\n".join(lines))


def cmd_histories(args) -> int:
    sc = load_scenario(args.file).to_scenario()
    hv = enumerate_history_vector(sc, args.prune)
    lines = history_table(hv)
    if args.diagram:
        lines += ["", *render_history_diagram(hv).lines]
    _emit(args, {"histories": histories_json(hv)}, lines)
    return EXIT_OK


def _outcome_matcher(label: str):
    if any(ch in label for ch in "*?["):
        return lambda lab: fnmatch.fnmatchcase(lab, label)
    return label


def cmd_collapse(args) -> int:
    sc = load_scenario(args.file).to_scenario()
    if not 1 <= args.at <= sc.num_steps:
        raise UsageError(f"--at {args.at} outside 1..{sc.num_steps}")
    hv = enumerate_history_vector(sc, args.prune)
    outcome = _outcome_matcher(args.outcome)
    p = marginal_probability(hv, args.at, outcome)
    collapsed = collapse_on_outcome(hv, args.at, outcome)
    lines = [f"observed {args.outcome!r} at step {args.at} (probability {fmt(p)})", *history_table(collapsed)]
    lines += ["", *render_history_diagram(collapsed).lines]
    payload = {"step": args.at, "outcome": args.outcome, "probability": p, "histories": histories_json(collapsed)}
    _emit(args, payload, lines)
    return EXIT_OK


def _wire_list(text: str) -> list[int]:
    try:
        return [int(w) for w in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid wire list {text!r}") from None


def cmd_reduce(args) -> int:
    sc = load_scenario(args.file).to_scenario()
    step = sc.num_steps if args.at_step is None else args.at_step
    if not 0 <= step <= sc.num_steps:
        raise UsageError(f"--at-step {step} outside 0..{sc.num_steps}")
    keep = [w for chunk in args.keep for w in chunk]
    rho = evolved_density(sc, step, unitary_only=args.unitary)
    try:
        reduced = partial_trace(rho, keep)
    except InvalidWireError as exc:
        raise UsageError(str(exc)) from None
    m = reduced.matrix
    lines = [f"reduced density matrix on wires {' '.join(map(str, keep))} after step {step} evolution"]
    lines += _table([""] * m.shape[1], [[fmt_complex(z) for z in row] for row in m])[1:]
    payload = {"keep": keep, "at_step": step, "matrix": matrix_json(m)}
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_sample(args) -> int:
    sc = load_scenario(args.file).to_scenario()
    hv = enumerate_history_vector(sc, args.prune)
    report = sample_histories(sc, args.shots, args.seed)
    rows = compare_to_engine(report, hv)
    failed = any(r.failed for r in rows)
    max_z = max((abs(r.z_score) for r in rows), default=0.0)
    table = [
        [",".join(r.history) or "()", str(report.counts.get(r.history, 0)), fmt(r.empirical), fmt(r.exact), fmt(r.z_score)]
        for r in rows
    ]
    lines = _table(["history", "count", "empirical", "exact", "z"], table)
    lines.append(f"shots {report.shots}  seed {report.seed}  max |z| {fmt(max_z)}  {'FAIL' if failed else 'PASS'} (bound {fmt(Z_BOUND)})")
    payload = {
        "shots": report.shots,
        "seed": report.seed,
        "histories": [
            {
                "labels": list(r.history),
                "count": report.counts.get(r.history, 0),
                "empirical": r.empirical,
                "exact": r.exact,
                "z": r.z_score if math.isfinite(r.z_score) else None,
            }
            for r in rows
        ],
        "max_abs_z": max_z if math.isfinite(max_z) else None,
        "passed": not failed,
    }
    _emit(args, payload, lines)
    return EXIT_STATISTICAL if failed else EXIT_OK


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")


def cmd_wigner(args) -> int:
    rep = run_wigner_report(args.alpha, args.beta)
    rho_s = rep.rho_S.matrix
    lines = [
        f"alpha = {fmt_complex(rep.alpha)}, beta = {fmt_complex(rep.beta)}",
        "",
        "friend F (records the result of measuring S):",
    ]
    for label, (p, post) in rep.friend.items():
        lines.append(f"  result {label} with probability {fmt(p)}, S -> |{label}>")
    lines += [
        "",
        "S+F after the friend's measurement (unitary, as seen by W):",
        "  " + "  ".join(f"|{i:02b}>: {fmt_complex(z)}" for i, z in enumerate(rep.entangled_state.amplitudes)),
        "",
        "reduced density operator of S (trace over F):",
        *("  " + line for line in _table(["", ""], [[fmt_complex(z) for z in row] for row in rho_s])[1:]),
        "",
        "history vector:",
        *("  " + line for line in history_table(rep.hv)),
        "",
        *("  " + line for line in render_history_diagram(rep.hv).lines),
        "",
        "after W finds F = 1 at step 2:",
    ]
    if rep.collapsed_hv_on_F1 is None:
        lines.append("  impossible (beta = 0)")
    else:
        lines += ["  " + line for line in render_history_diagram(rep.collapsed_hv_on_F1).lines]
    lines += ["", f"agreement between W and F records: {'yes' if rep.agreement_check else 'NO'}"]
    payload = {
        "alpha": complex_json(rep.alpha),
        "beta": complex_json(rep.beta),
        "friend": {label: p for label, (p, _) in rep.friend.items()},
        "entangled_state": [complex_json(z) for z in rep.entangled_state.amplitudes],
        "rho_SF": matrix_json(rep.rho_SF.matrix),
        "rho_S": matrix_json(rho_s),
        "histories": histories_json(rep.hv),
        "collapsed_on_F1": None if rep.collapsed_hv_on_F1 is None else {"histories": histories_json(rep.collapsed_hv_on_F1)},
        "agreement": rep.agreement_check,
    }
    _emit(args, payload, lines)
    return EXIT_OK if rep.agreement_check else EXIT_INVARIANT


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhistories", description="History-vector simulation of qubit measurement schedules.")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_, func):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="scenario file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--prune", type=float, default=DEFAULT_PRUNE_TOL, metavar="TOL",
                       help="drop histories with |A| <= TOL (default %(default)g)")
        p.set_defaults(func=func)
        return p

    p = scenario_cmd("histories", "enumerate the history vector", cmd_histories)
    p.add_argument("--diagram", action="store_true", help="append a history diagram")

    p = scenario_cmd("collapse", "collapse the history vector on an observed outcome", cmd_collapse)
    p.add_argument("--at", type=int, required=True, metavar="STEP", help="1-based step index")
    p.add_argument("--outcome", required=True, metavar="LABEL", help="outcome label (glob patterns allowed, e.g. '?1')")

    p = scenario_cmd("reduce", "reduced density matrix after a step's evolution", cmd_reduce)
    p.add_argument("--keep", type=_wire_list, nargs="+", required=True, metavar="WIRES")
    p.add_argument("--at-step", type=int, default=None, metavar="K", help="default: last step")
    p.add_argument("--unitary", action="store_true", help="ignore earlier measurement slots")

    p = scenario_cmd("sample", "Born-rule sampling checked against the engine", cmd_sample)
    p.add_argument("--shots", type=_positive_int, required=True, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")

    p = sub.add_parser("wigner", help="Wigner's-friend report")
    p.add_argument("--alpha", type=_complex_arg, required=True, metavar="RE,IM")
    p.add_argument("--beta", type=_complex_arg, required=True, metavar="RE,IM")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_wigner)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ImpossibleOutcomeError, ZeroProbabilityError) as exc:
        print(f"impossible outcome: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except QHistoriesError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
