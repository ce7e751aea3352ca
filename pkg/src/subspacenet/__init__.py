"""Subspace-constrained diffusion estimation over networks.

Library, HTTP service and CLI for simulating online parameter estimation
where the per-node optimal vectors share a known low-dimensional subspace.
Two projected strategies (centralized and distributed) are implemented next
to a plain diffusion baseline, with Monte-Carlo MSD learning curves.
"""

__version__ = "0.1.0"

from .algorithms import (
    AgentState,
    c_subspace_step,
    d_subspace_step,
    diffusion_baseline_step,
    initial_states,
)
from .config import ExperimentConfig, parse_config
from .linalg import Projector, project_rows, projector_from_coefficients, solve_spd
from .metrics import MsdTrace, average_traces, network_msd, steady_state_msd
from .network import (
    CombinationMatrix,
    NetworkTopology,
    build_index_map,
    build_topology,
    column_index,
    identity_combination,
    metropolis_combination,
    uniform_combination,
    validate_combination,
)
from .runner import ExperimentResult, run_experiment
from .scenario import (
    DataSample,
    LocalSubspace,
    RegressionTask,
    SubspaceModel,
    derive_local_subspaces,
    draw_sample,
    exact_gradient,
    generate_clustered_coefficients,
    generate_global_subspace,
    load_scenario,
    stochastic_gradient,
)

__all__ = [
    "__version__",
    "AgentState",
    "CombinationMatrix",
    "DataSample",
    "ExperimentConfig",
    "ExperimentResult",
    "LocalSubspace",
    "MsdTrace",
    "NetworkTopology",
    "Projector",
    "RegressionTask",
    "SubspaceModel",
    "average_traces",
    "build_index_map",
    "build_topology",
    "c_subspace_step",
    "column_index",
    "d_subspace_step",
    "derive_local_subspaces",
    "diffusion_baseline_step",
    "draw_sample",
    "exact_gradient",
    "generate_clustered_coefficients",
    "generate_global_subspace",
    "identity_combination",
    "initial_states",
    "load_scenario",
    "metropolis_combination",
    "network_msd",
    "parse_config",
    "project_rows",
    "projector_from_coefficients",
    "run_experiment",
    "solve_spd",
    "steady_state_msd",
    "stochastic_gradient",
    "uniform_combination",
    "validate_combination",
]
