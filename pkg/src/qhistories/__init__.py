"""History-vector simulation of small qubit systems under measurement schedules."""

from .histories import (
    DEFAULT_PRUNE_TOL,
    HistoryVector,
    Scenario,
    ScheduleStep,
    bit_is,
    chain_operator,
    collapse_on_outcome,
    conditional_distribution,
    enumerate_history_vector,
    evolved_density,
    history_amplitude,
    history_probability,
    marginal_probability,
)
from .quantum import (
    DensityOperator,
    GatePlacement,
    ProjectorFamily,
    StateVector,
    apply_gate,
    born_update,
    computational_basis_family,
    density_from_pure,
    lift_gate,
    partial_trace,
    subsystem_family,
)
from .sampling import SampleReport, compare_to_engine, sample_histories
from .wigner import WignerReport, build_wigner_scenario, run_wigner_report, w_measures_S

__version__ = "0.1.0"
