"""Thermal (Gibbs) versus objective (spectrum-broadcast-structure) states of finite systems."""
from .operators import (
    BlochVector,
    DensityOperator,
    HermitianOperator,
    from_bloch,
    partial_trace,
    tensor,
    to_bloch,
    trace_norm,
)
from .gibbs import INFINITE, HamiltonianSpec, fit_thermal, gibbs_state, partition_function
from .sbs import (
    PartitionAssignment,
    SBSState,
    assemble,
    certify_sbs,
    check_equal_dim_coexistence,
    distance_to_TsO,
    exact_thermal_objective_state,
    infinite_T_exact_states,
    thermal_system_objective,
)

__version__ = "0.1.0"
