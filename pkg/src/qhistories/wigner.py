"""The two-qubit Wigner's-friend circuit.

Wire 0 is the system S, wire 1 the friend F (initially ``|0>``). The friend's
measurement is a CNOT with S as control. The schedule has two slots, each
a full computational-basis measurement: slot 1 before the CNOT (identity
evolution), slot 2 after it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImpossibleOutcomeError, NormalizationError, ZeroProbabilityError
from .histories import (
    HistoryVector,
    Scenario,
    ScheduleStep,
    bit_is,
    collapse_on_outcome,
    conditional_distribution,
    enumerate_history_vector,
    marginal_probability,
)
from .quantum import (
    CNOT,
    ZERO_PROBABILITY_FLOOR,
    DensityOperator,
    GatePlacement,
    StateVector,
    apply_gate,
    born_update,
    computational_basis_family,
    density_from_pure,
    partial_trace,
    subsystem_family,
)

S_WIRE, F_WIRE = 0, 1
AGREEMENT_TOL = 1e-12


def _system_state(alpha: complex, beta: complex) -> StateVector:
    norm2 = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm2 - 1.0) > 1e-9:
        raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm2:.12g}, expected 1")
    return StateVector(np.array([alpha, beta], dtype=complex))


def initial_state(alpha: complex, beta: complex) -> StateVector:
    """``(alpha|0> + beta|1>) (x) |0>`` on (S, F)."""
    s = _system_state(alpha, beta)
    return StateVector(np.kron(s.amplitudes, [1, 0]))


def build_wigner_scenario(alpha: complex, beta: complex) -> Scenario:
    psi = initial_state(alpha, beta)
    comp = computational_basis_family(2)
    return Scenario(psi, (ScheduleStep.measure_only(comp), ScheduleStep(CNOT, comp)))


def entangled_state(alpha: complex, beta: complex) -> StateVector:
    return apply_gate(initial_state(alpha, beta), GatePlacement(CNOT, (S_WIRE, F_WIRE)))


def w_measures_S(alpha: complex, beta: complex, outcome: str) -> tuple[float, StateVector]:
    """W measures only S on the entangled S+F state (rank-2 projectors)."""
    fam = subsystem_family(computational_basis_family(1), [S_WIRE], 2)
    return born_update(entangled_state(alpha, beta), fam, outcome)


def friend_view(alpha: complex, beta: complex) -> dict[str, tuple[float, StateVector]]:
    """F's own account: a Born update of S alone, per possible result."""
    s = _system_state(alpha, beta)
    fam = computational_basis_family(1)
    out = {}
    for label in fam:
        try:
            out[label] = born_update(s, fam, label)
        except ZeroProbabilityError:
            continue
    return out


@dataclass(frozen=True, eq=False)
class WignerReport:
    alpha: complex
    beta: complex
    entangled_state: StateVector
    rho_SF: DensityOperator
    rho_S: DensityOperator
    hv: HistoryVector
    collapsed_hv_on_F1: HistoryVector | None
    agreement_check: bool
    friend: dict[str, tuple[float, StateVector]]


def check_agreement(alpha: complex, beta: complex, hv: HistoryVector | None = None) -> bool:
    """W's S-outcome and F's record always coincide.

    Checked two ways: by conditioning the history vector on each possible
    S-bit at slot 2, and by a Born update of S followed by a measurement of F.
    """
    if hv is None:
        hv = enumerate_history_vector(build_wigner_scenario(alpha, beta))
    f_family = subsystem_family(computational_basis_family(1), [F_WIRE], 2)
    for s_bit in "01":
        if marginal_probability(hv, 2, bit_is(S_WIRE, s_bit)) < ZERO_PROBABILITY_FLOOR:
            continue
        cond = conditional_distribution(hv, (2, bit_is(S_WIRE, s_bit)))
        agree = sum(p for h, p in cond if h[1][F_WIRE] == s_bit)
        if abs(agree - 1.0) > AGREEMENT_TOL:
            return False
        _, post = w_measures_S(alpha, beta, s_bit)
        p_f, _ = born_update(post, f_family, s_bit)
        if abs(p_f - 1.0) > AGREEMENT_TOL:
            return False
    return True


def run_wigner_report(alpha: complex, beta: complex) -> WignerReport:
    sc = build_wigner_scenario(alpha, beta)
    state = entangled_state(alpha, beta)
    rho_sf = density_from_pure(state)
    hv = enumerate_history_vector(sc)
    try:
        collapsed = collapse_on_outcome(hv, 2, bit_is(F_WIRE, 1))
    except ImpossibleOutcomeError:
        collapsed = None
    return WignerReport(
        alpha=complex(alpha),
        beta=complex(beta),
        entangled_state=state,
        rho_SF=rho_sf,
        rho_S=partial_trace(rho_sf, [S_WIRE]),
        hv=hv,
        collapsed_hv_on_F1=collapsed,
        agreement_check=check_agreement(alpha, beta, hv),
        friend=friend_view(alpha, beta),
    )
