"""End-to-end experiment execution.

Builds every structure up front (so structural problems surface before the
first iteration), then loops Monte-Carlo runs sequentially. Within a run all
requested algorithms consume the same data streams and start from the same
initialization, which makes their steady-state comparison paired. Traces are
averaged in ascending run order so repeated invocations agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithms import (
    AgentState,
    c_subspace_step,
    d_subspace_step,
    diffusion_baseline_step,
    initial_states,
)
from .config import ExperimentConfig, ScenarioSettings
from .errors import DivergenceDetected, ValidationError
from .linalg import Projector, projector_from_coefficients
from .metrics import (
    MsdTrace,
    average_traces,
    default_steady_state_window,
    make_trace,
    per_node_squared_errors,
    steady_state_msd,
)
from .network import (
    CombinationMatrix,
    IndexMap,
    NetworkTopology,
    build_index_map,
    full_topology,
    identity_combination,
    load_topology,
    metropolis_combination,
    random_connected_topology,
    ring_topology,
    star_topology,
    uniform_combination,
)
from .scenario import (
    DataSample,
    LocalSubspace,
    RegressionTask,
    SubspaceModel,
    derive_local_subspaces,
    dump_scenario,
    generate_clustered_coefficients,
    generate_global_subspace,
    generate_sample_arrays,
    init_rng,
    make_tasks,
    topology_rng,
)

_COMBINATION_RULES = {
    "uniform": uniform_combination,
    "metropolis": metropolis_combination,
    "identity": identity_combination,
}


@dataclass(frozen=True, eq=False)
class ScenarioBundle:
    """Everything derived from the scenario block of a configuration."""

    model: SubspaceModel
    topology: NetworkTopology
    tasks: list[RegressionTask]
    rows_per_node: tuple[tuple[int, ...], ...] | None
    local_subspaces: list[LocalSubspace] | None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    model: SubspaceModel
    topology: NetworkTopology
    traces: dict[str, MsdTrace]
    steady_state_db: dict[str, float]
    steady_state_window: int
    transfers_per_iteration: dict[str, int]


def topology_from_settings(settings: ScenarioSettings) -> NetworkTopology:
    n = settings.node_count
    if settings.topology == "ring":
        return ring_topology(n)
    if settings.topology == "full":
        return full_topology(n)
    if settings.topology == "star":
        return star_topology(n)
    if settings.topology == "random":
        return random_connected_topology(n, settings.topology_p, topology_rng(settings.seed))
    if settings.topology == "file":
        path = Path(settings.topology_file or "")
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValidationError(
                f"scenario.topology_file: cannot read {path}: {exc}",
                key="scenario.topology_file",
            ) from None
        return load_topology(text, node_count=n)
    raise ValidationError(f"unsupported topology {settings.topology!r}", key="scenario.topology")


def build_scenario(config: ExperimentConfig, *, need_local: bool) -> ScenarioBundle:
    s = config.scenario
    topology = topology_from_settings(s)
    if s.generator == "clustered":
        model = generate_clustered_coefficients(s.dim, s.node_count, s.rank, topology, s.seed)
    else:
        model = generate_global_subspace(s.dim, s.node_count, s.rank, s.seed)
    tasks = make_tasks(model, correlation=s.covariance_rho, noise_variance=s.noise_variance)
    rows = None
    locals_ = None
    if need_local:
        locals_ = derive_local_subspaces(
            model, topology, mode=s.local_mode, loading=config.algorithm.loading
        )
        rows = tuple(ls.basis_rows for ls in locals_)
    return ScenarioBundle(
        model=model, topology=topology, tasks=tasks, rows_per_node=rows, local_subspaces=locals_
    )


def dump_scenario_text(config: ExperimentConfig) -> str:
    """Scenario snapshot for the given configuration (always derives the
    per-node row selections, whatever algorithms are requested)."""
    bundle = build_scenario(config, need_local=True)
    s = config.scenario
    assert bundle.rows_per_node is not None
    return dump_scenario(
        bundle.model,
        bundle.topology,
        bundle.rows_per_node,
        seed=s.seed,
        generator=s.generator,
        local_mode=s.local_mode,
        loading=config.algorithm.loading,
    )


def _transfer_counts(topology: NetworkTopology, dim: int) -> dict[str, int]:
    """Scalar transfers per iteration. The distributed strategy exchanges
    intermediates outbound and projected columns inbound with every true
    neighbor; the baseline exchanges intermediates once; the centralized
    strategy ships every estimate to a fusion center and back."""
    n = topology.node_count
    neighbor_links = sum(len(nbrs) - 1 for nbrs in topology.neighborhoods)
    return {
        "c_subspace": 2 * n * dim,
        "d_subspace": 2 * dim * neighbor_links,
        "diffusion_baseline": dim * neighbor_links,
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute every requested algorithm and average traces across runs."""
    s, a, r = config.scenario, config.algorithm, config.run
    labels = a.algorithms
    need_local = "d_subspace" in labels
    bundle = build_scenario(config, need_local=need_local)
    model, topology, tasks = bundle.model, bundle.topology, bundle.tasks

    global_projector: Projector | None = None
    if "c_subspace" in labels:
        global_projector = projector_from_coefficients(model.coefficients, a.loading)
    index_map: IndexMap | None = build_index_map(topology) if need_local else None
    combination: CombinationMatrix | None = None
    if "d_subspace" in labels or "diffusion_baseline" in labels:
        combination = _COMBINATION_RULES[a.combination](topology)

    mus = a.step_sizes(s.node_count)
    exact = a.gradient == "exact"
    t_iters = r.iterations
    w_star = model.w_star

    def step(label: str, states: list[AgentState], samples: list[DataSample] | None):
        step_tasks = tasks if exact else None
        if label == "c_subspace":
            return c_subspace_step(states, samples, global_projector, tasks=step_tasks)
        if label == "d_subspace":
            return d_subspace_step(
                states, samples, topology, index_map, bundle.local_subspaces,
                combination, tasks=step_tasks,
            )
        return diffusion_baseline_step(states, samples, topology, combination, tasks=step_tasks)

    runs_by_label: dict[str, list[MsdTrace]] = {label: [] for label in labels}
    for run_idx in range(r.monte_carlo):
        if a.init == "gaussian":
            w0 = init_rng(s.seed, run_idx).standard_normal((s.dim, s.node_count))
        else:
            w0 = np.zeros((s.dim, s.node_count))

        samples_by_iter: list[list[DataSample]] | None = None
        if not exact:
            u_all, d_all = generate_sample_arrays(tasks, t_iters, s.seed, run_idx)
            samples_by_iter = [
                [
                    DataSample(node=k0 + 1, time=n, u=u_all[n, k0], d=float(d_all[n, k0]))
                    for k0 in range(s.node_count)
                ]
                for n in range(t_iters)
            ]

        for label in labels:
            states = initial_states(w0, mus)
            lin = np.empty(t_iters + 1)
            per_node = np.empty((t_iters + 1, s.node_count))
            sq = per_node_squared_errors(states, w_star)
            per_node[0] = sq
            lin[0] = sq.mean()
            for n in range(t_iters):
                samples = samples_by_iter[n] if samples_by_iter is not None else None
                try:
                    states = step(label, states, samples)
                except DivergenceDetected as exc:
                    exc.algorithm = label
                    exc.run_index = run_idx
                    exc.iteration = n + 1
                    raise
                sq = per_node_squared_errors(states, w_star)
                per_node[n + 1] = sq
                lin[n + 1] = sq.mean()
            runs_by_label[label].append(
                make_trace(label, lin, run_index=run_idx, per_node=per_node)
            )

    traces = {label: average_traces(runs_by_label[label]) for label in labels}
    window = r.steady_state_window or default_steady_state_window(t_iters)
    steady = {label: steady_state_msd(trace, window) for label, trace in traces.items()}
    counts = _transfer_counts(topology, s.dim)
    transfers = {label: counts[label] for label in labels}
    return ExperimentResult(
        config=config,
        model=model,
        topology=topology,
        traces=traces,
        steady_state_db=steady,
        steady_state_window=window,
        transfers_per_iteration=transfers,
    )
