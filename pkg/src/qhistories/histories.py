"""Measurement schedules, chain operators, history amplitudes and history vectors.

A schedule is a list of steps; step ``k`` (1-based) evolves the register by
``U_k`` and then measures it with a projector family. A history is the tuple
of outcome labels, one per step.

Chain operator of a history::

    C = P_n U_n ... P_1 U_1 |psi><psi|

Its probability is ``Tr(C C^dagger)``. When the last projector has rank one,
``C = |g_n> A <psi|`` with the scalar amplitude::

    A = <g_n| U_n P_{n-1} U_{n-1} ... P_1 U_1 |psi>

Rank > 1 outcomes of the *last* step are split into rank-1 sub-outcomes
labelled ``"<label>.<j>"`` (``j`` indexing an orthonormal basis of the
projector's range) so that every entry of a history vector carries a scalar
amplitude. Degenerate projectors at earlier steps need no splitting; they
enter the amplitude as projectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DegenerateOutcomeError,
    DimensionError,
    HistoryLengthError,
    ImpossibleOutcomeError,
    NotUnitaryError,
    UnknownLabelError,
    ZeroProbabilityError,
)
from .linalg import adjoint, as_matrix, is_unitary, trace
from .quantum import (
    OPERATOR_TOL,
    ZERO_PROBABILITY_FLOOR,
    DensityOperator,
    ProjectorFamily,
    StateVector,
)

DEFAULT_PRUNE_TOL = 1e-12

History = tuple[str, ...]
# An observed outcome: an exact label, or a predicate over stored labels.
Outcome = Union[str, Callable[[str], bool]]


@dataclass(frozen=True, eq=False)
class ScheduleStep:
    evolution: np.ndarray
    measurement: ProjectorFamily

    def __post_init__(self):
        u = as_matrix(self.evolution)
        if u.shape != (self.measurement.dim, self.measurement.dim):
            raise DimensionError(f"evolution of shape {u.shape} does not match measurement dim {self.measurement.dim}")
        if not is_unitary(u, OPERATOR_TOL):
            raise NotUnitaryError("step evolution is not unitary")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "evolution", u)

    @classmethod
    def measure_only(cls, measurement: ProjectorFamily) -> "ScheduleStep":
        return cls(np.eye(measurement.dim, dtype=complex), measurement)


@dataclass(frozen=True, eq=False)
class Scenario:
    initial: StateVector
    steps: tuple[ScheduleStep, ...] = ()

    def __post_init__(self):
        steps = tuple(self.steps)
        for k, step in enumerate(steps, 1):
            if step.measurement.dim != self.initial.dim:
                raise DimensionError(f"step {k} acts on dim {step.measurement.dim}, register has dim {self.initial.dim}")
        object.__setattr__(self, "steps", steps)

    @property
    def num_qubits(self) -> int:
        return self.initial.num_qubits

    @property
    def num_steps(self) -> int:
        return len(self.steps)


def _resolve(family: ProjectorFamily, label: str) -> np.ndarray:
    """Range basis for ``label``, accepting ``"<label>.<j>"`` sub-outcomes."""
    if label in family:
        return family.basis(label)
    base, sep, sub = label.rpartition(".")
    if sep and base in family and sub.isdigit():
        v = family.basis(base)
        j = int(sub)
        if v.shape[1] > 1 and j < v.shape[1]:
            return v[:, [j]]
    raise UnknownLabelError(f"unknown outcome label {label!r}; expected one of {list(family.labels)}")


def _check_history(sc: Scenario, h: Sequence[str]) -> History:
    h = tuple(h)
    if len(h) != sc.num_steps:
        raise HistoryLengthError(f"history has {len(h)} label(s), schedule has {sc.num_steps} step(s)")
    return h


def _project(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    return v @ (v.conj().T @ x)


def chain_operator(sc: Scenario, h: Sequence[str]) -> np.ndarray:
    h = _check_history(sc, h)
    psi = sc.initial.amplitudes
    c = np.outer(psi, psi.conj())
    for step, label in zip(sc.steps, h):
        c = _project(_resolve(step.measurement, label), step.evolution @ c)
    return c


def history_probability(sc: Scenario, h: Sequence[str]) -> float:
    c = chain_operator(sc, h)
    return float(trace(c @ adjoint(c)).real)


def history_amplitude(sc: Scenario, h: Sequence[str]) -> complex:
    """Scalar amplitude of a history whose final outcome has rank one.

    Raises :class:`DegenerateOutcomeError` otherwise; use
    :func:`history_probability` or a ``"<label>.<j>"`` sub-outcome instead.
    """
    h = _check_history(sc, h)
    branch = sc.initial.amplitudes
    if not h:
        return complex(np.vdot(branch, branch))
    for step, label in zip(sc.steps[:-1], h[:-1]):
        branch = _project(_resolve(step.measurement, label), step.evolution @ branch)
    final = _resolve(sc.steps[-1].measurement, h[-1])
    if final.shape[1] != 1:
        raise DegenerateOutcomeError(f"final outcome {h[-1]!r} has rank {final.shape[1]}; no scalar amplitude")
    return complex(np.vdot(final[:, 0], sc.steps[-1].evolution @ branch))


class HistoryVector(Mapping):
    """Histories with non-vanishing amplitudes, ordered by label tuple.

    ``refinements`` maps final-step sub-outcome labels (``"0.1"``) back to the
    measured outcome they refine (``"0"``).
    """

    def __init__(
        self,
        entries: Mapping[History, complex],
        prune_tol: float = DEFAULT_PRUNE_TOL,
        refinements: Mapping[str, str] | None = None,
    ):
        items = sorted((tuple(h), complex(a)) for h, a in entries.items())
        lengths = {len(h) for h, _ in items}
        if len(lengths) > 1:
            raise HistoryLengthError(f"histories of mixed lengths {sorted(lengths)}")
        for h, a in items:
            if not np.isfinite(a):
                raise ValueError(f"non-finite amplitude for history {h}")
            if abs(a) <= prune_tol:
                raise ValueError(f"history {h} has amplitude {abs(a):.3g} at or below prune_tol {prune_tol:g}")
        self._entries = dict(items)
        self.prune_tol = prune_tol
        self.refinements = dict(refinements or {})

    def __getitem__(self, h) -> complex:
        return self._entries[tuple(h)]

    def __iter__(self) -> Iterator[History]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        body = ", ".join(f"{h}: {a:.6g}" for h, a in self._entries.items())
        return f"HistoryVector({{{body}}})"

    @property
    def num_steps(self) -> int:
        return len(next(iter(self._entries), ()))

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._entries.values()))

    def probabilities(self) -> dict[History, float]:
        return {h: abs(a) ** 2 for h, a in self._entries.items()}

    def coarse_label(self, step_index: int, label: str) -> str:
        if step_index == self.num_steps:
            return self.refinements.get(label, label)
        return label

    def coarse_history(self, h: History) -> History:
        if not h:
            return h
        return h[:-1] + (self.refinements.get(h[-1], h[-1]),)

    def coarse_probabilities(self) -> dict[History, float]:
        """Probabilities with final-step sub-outcomes merged into their outcome."""
        out: dict[History, float] = {}
        for h, a in self._entries.items():
            key = self.coarse_history(h)
            out[key] = out.get(key, 0.0) + abs(a) ** 2
        return out

    def _matcher(self, step_index: int, label: Outcome) -> Callable[[History], bool]:
        if not 1 <= step_index <= self.num_steps:
            raise IndexError(f"step {step_index} outside 1..{self.num_steps}")
        i = step_index - 1
        if callable(label):
            return lambda h: bool(label(h[i]))
        return lambda h: h[i] == label or self.coarse_label(step_index, h[i]) == label


def bit_is(position: int, bit) -> Callable[[str], bool]:
    """Predicate: the outcome label has character ``bit`` at ``position``.

    For computational-basis labels this selects one measured wire, e.g.
    ``bit_is(1, 1)`` is "the second measured qubit read 1".
    """
    want = str(bit)

    def match(label: str) -> bool:
        return len(label) > position and label[position] == want

    return match


def enumerate_history_vector(sc: Scenario, prune_tol: float = DEFAULT_PRUNE_TOL) -> HistoryVector:
    """Depth-first branch propagation over the schedule.

    A branch whose norm drops to ``prune_tol`` is abandoned: projectors and
    unitaries never increase norm, so none of its descendants can exceed it.
    """
    psi = sc.initial.amplitudes
    if not sc.steps:
        return HistoryVector({(): complex(np.vdot(psi, psi))}, prune_tol)

    entries: dict[History, complex] = {}
    refinements: dict[str, str] = {}
    last = len(sc.steps) - 1
    stack: list[tuple[History, np.ndarray]] = [((), psi)]
    while stack:
        prefix, branch = stack.pop()
        k = len(prefix)
        step = sc.steps[k]
        evolved = step.evolution @ branch
        fam = step.measurement
        for label in fam:
            v = fam.basis(label)
            coeffs = v.conj().T @ evolved
            if k == last:
                if v.shape[1] == 1:
                    if abs(coeffs[0]) > prune_tol:
                        entries[prefix + (label,)] = complex(coeffs[0])
                    continue
                for j, a in enumerate(coeffs):
                    sub = f"{label}.{j}"
                    refinements[sub] = label
                    if abs(a) > prune_tol:
                        entries[prefix + (sub,)] = complex(a)
            elif np.linalg.norm(coeffs) > prune_tol:
                stack.append((prefix + (label,), v @ coeffs))
    return HistoryVector(entries, prune_tol, refinements)


def collapse_on_outcome(hv: HistoryVector, step_index: int, label: Outcome) -> HistoryVector:
    """Keep the histories compatible with an observed outcome and renormalize."""
    match = hv._matcher(step_index, label)
    kept = {h: a for h, a in hv.items() if match(h)}
    weight = sum(abs(a) ** 2 for a in kept.values())
    if not kept or weight < ZERO_PROBABILITY_FLOOR:
        raise ImpossibleOutcomeError(f"no history has outcome {_describe(label)} at step {step_index}")
    scale = 1.0 / np.sqrt(weight)
    return HistoryVector({h: a * scale for h, a in kept.items()}, hv.prune_tol, hv.refinements)


def marginal_probability(hv: HistoryVector, step_index: int, label: Outcome) -> float:
    match = hv._matcher(step_index, label)
    return float(sum(abs(a) ** 2 for h, a in hv.items() if match(h)))


def conditional_distribution(hv: HistoryVector, given: tuple[int, Outcome]) -> list[tuple[History, float]]:
    step_index, label = given
    match = hv._matcher(step_index, label)
    marginal = marginal_probability(hv, step_index, label)
    if marginal < ZERO_PROBABILITY_FLOOR:
        raise ZeroProbabilityError(f"cannot condition on outcome {_describe(label)} at step {step_index}: marginal {marginal:.3g}")
    return [(h, abs(a) ** 2 / marginal) for h, a in hv.items() if match(h)]


def _describe(label: Outcome) -> str:
    return repr(label) if isinstance(label, str) else getattr(label, "__name__", "<predicate>")


def evolved_density(sc: Scenario, step_index: int, unitary_only: bool = False) -> DensityOperator:
    """Density operator right after step ``step_index``'s evolution, before its measurement.

    Earlier measurement slots act non-selectively (``rho -> sum P rho P``),
    i.e. outcomes happened but were not recorded. With ``unitary_only`` they
    are skipped and the result is the pure state ``U_k ... U_1 |psi>``.
    ``step_index`` 0 is the initial state.
    """
    if not 0 <= step_index <= sc.num_steps:
        raise IndexError(f"step {step_index} outside 0..{sc.num_steps}")
    psi = sc.initial.amplitudes
    if unitary_only:
        for step in sc.steps[:step_index]:
            psi = step.evolution @ psi
        return DensityOperator(np.outer(psi, psi.conj()))
    rho = np.outer(psi, psi.conj())
    for k, step in enumerate(sc.steps[:step_index], 1):
        u = step.evolution
        rho = u @ rho @ u.conj().T
        if k == step_index:
            break
        measured = np.zeros_like(rho)
        for label in step.measurement:
            v = step.measurement.basis(label)
            measured += v @ (v.conj().T @ rho @ v) @ v.conj().T
        rho = measured
    return DensityOperator(rho)
