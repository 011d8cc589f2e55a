"""Monte Carlo check of history probabilities by Born-rule sampling.

Each shot walks the schedule: evolve, draw an outcome with Born weights,
collapse, record the label. This path never builds a chain operator, so it
is an independent check on :mod:`qhistories.histories`.

Randomness comes from numpy's counter-based Philox generator keyed by the
seed. Shot ``i`` consumes uniform number ``i * n_steps + k`` of that stream
at step ``k``, so the draw for any (shot, step) pair is fixed by the seed
alone and does not depend on how shots are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EngineMismatchError
from .histories import History, HistoryVector, Scenario
from .quantum import ZERO_PROBABILITY_FLOOR

Z_BOUND = 4.0


@dataclass(frozen=True)
class SampleReport:
    shots: int
    counts: dict[History, int] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError(f"counts sum to {sum(self.counts.values())}, expected {self.shots} shots")

    def frequencies(self) -> dict[History, float]:
        return {h: c / self.shots for h, c in self.counts.items()}


def shot_uniforms(seed: int, shots: int, num_steps: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random((shots, num_steps))


def sample_histories(sc: Scenario, shots: int, seed: int) -> SampleReport:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if not sc.steps:
        return SampleReport(shots, {(): shots}, seed)

    u = shot_uniforms(seed, shots, sc.num_steps)
    # Shots that share an outcome prefix share a post-measurement state, so
    # they are walked together; each still draws with its own uniform.
    groups: dict[History, tuple[np.ndarray, np.ndarray]] = {
        (): (sc.initial.amplitudes, np.arange(shots))
    }
    for k, step in enumerate(sc.steps):
        fam = step.measurement
        labels = fam.labels
        nxt: dict[History, tuple[np.ndarray, np.ndarray]] = {}
        for prefix, (state, idx) in groups.items():
            evolved = step.evolution @ state
            coeffs = [fam.basis(lab).conj().T @ evolved for lab in labels]
            probs = np.array([float(np.vdot(c, c).real) for c in coeffs])
            probs[probs < ZERO_PROBABILITY_FLOOR] = 0.0
            cdf = np.cumsum(probs)
            cdf /= cdf[-1]
            choice = np.searchsorted(cdf, u[idx, k], side="right")
            np.minimum(choice, len(labels) - 1, out=choice)
            for j in np.unique(choice):
                v = fam.basis(labels[j])
                collapsed = v @ coeffs[j] / math.sqrt(probs[j])
                nxt[prefix + (labels[j],)] = (collapsed, idx[choice == j])
        groups = nxt
    counts = {h: len(idx) for h, (_, idx) in sorted(groups.items())}
    return SampleReport(shots, counts, seed)


class ComparisonRow(NamedTuple):
    history: History
    empirical: float
    exact: float
    z_score: float

    @property
    def failed(self) -> bool:
        return not abs(self.z_score) <= Z_BOUND


def z_score(freq: float, p: float, shots: int) -> float:
    var = p * (1.0 - p) / shots
    if var <= 0.0:
        return 0.0 if abs(freq - p) <= 1e-12 else math.inf
    return (freq - p) / math.sqrt(var)


def compare_to_engine(report: SampleReport, hv: HistoryVector) -> list[ComparisonRow]:
    """Per-history empirical vs exact probability with a binomial z-score.

    Final-step sub-outcomes in ``hv`` are merged back into the measured
    outcome, since sampling only ever records what the measurement reports.
    """
    if report.shots < 1:
        raise ValueError("report has no shots")
    exact = hv.coarse_probabilities()
    unknown = [h for h in report.counts if h not in exact]
    if unknown:
        raise EngineMismatchError(f"sampled histories absent from the history vector: {unknown}")
    rows = []
    for h in sorted(set(exact) | set(report.counts)):
        freq = report.counts.get(h, 0) / report.shots
        p = exact[h]
        rows.append(ComparisonRow(h, freq, p, z_score(freq, p, report.shots)))
    return rows
