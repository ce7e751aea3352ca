"""Single-iteration updates for the projected and baseline strategies.

All three steps are synchronous: every intermediate vector is computed from
the iteration-n states before any mixing, so the result does not depend on
node processing order. Steps are pure functions from (states, data) to a new
list of states; inputs are never mutated.

Two gradient modes are supported. By default each node consumes one
DataSample and uses the instantaneous squared-error gradient; passing
``tasks=`` instead switches every node to the closed-form gradient of its
expected cost, which makes runs deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceDetected
from .linalg import Projector
from .network import CombinationMatrix, IndexMap, NetworkTopology
from .scenario import DataSample, RegressionTask, exact_gradient

__all__ = [
    "AgentState",
    "DIVERGENCE_NORM",
    "c_subspace_step",
    "d_subspace_step",
    "diffusion_baseline_step",
    "initial_states",
    "stack_neighborhood",
]

#: Estimate norms beyond this bound abort a run as diverged.
DIVERGENCE_NORM = 1e9


@dataclass(slots=True)
class AgentState:
    """Current estimate and step size of one node."""

    node: int
    w: np.ndarray
    mu: float


def initial_states(w0: np.ndarray, mus) -> list[AgentState]:
    """States for columns of a (dim, N) initial matrix with per-node steps."""
    dim, n = w0.shape
    mus = np.broadcast_to(np.asarray(mus, dtype=np.float64), (n,))
    if (mus < 0).any():
        raise ValueError("step sizes must be >= 0")
    return [AgentState(node=k + 1, w=w0[:, k].copy(), mu=float(mus[k])) for k in range(n)]


def _stack(states: list[AgentState]) -> np.ndarray:
    return np.column_stack([s.w for s in states])


def _adapt(
    states: list[AgentState],
    samples: list[DataSample] | None,
    tasks: list[RegressionTask] | None,
) -> np.ndarray:
    """Per-node gradient step: column k is w_k - mu_k * grad_k."""
    w = _stack(states)
    if tasks is not None:
        psi = np.empty_like(w)
        for i, (state, task) in enumerate(zip(states, tasks)):
            if task.node != state.node:
                raise ValueError("tasks are not aligned with states")
            psi[:, i] = state.w - state.mu * exact_gradient(state.w, task)
        return psi
    if samples is None or len(samples) != len(states):
        raise ValueError("need one sample per node (or tasks= for exact gradients)")
    u = np.empty_like(w)
    d = np.empty(len(states))
    mus = np.empty(len(states))
    for i, (state, sample) in enumerate(zip(states, samples)):
        if sample.node != state.node:
            raise ValueError("samples are not aligned with states")
        u[:, i] = sample.u
        d[i] = sample.d
        mus[i] = state.mu
    residual = d - np.einsum("ln,ln->n", u, w)
    return w + (2.0 * mus * residual) * u


def _check_bounded(w: np.ndarray, states: list[AgentState]) -> None:
    sq = np.einsum("ln,ln->n", w, w)
    bad = ~np.isfinite(sq) | (sq > DIVERGENCE_NORM * DIVERGENCE_NORM)
    if bad.any():
        node = states[int(np.argmax(bad))].node
        raise DivergenceDetected(
            f"estimate at node {node} became non-finite or exceeded {DIVERGENCE_NORM:g}",
            node=node,
        )


def _rebuild(states: list[AgentState], new_w: np.ndarray) -> list[AgentState]:
    return [
        AgentState(node=s.node, w=new_w[:, i].copy(), mu=s.mu)
        for i, s in enumerate(states)
    ]


def stack_neighborhood(psi: np.ndarray, topology: NetworkTopology, k: int) -> np.ndarray:
    """Columns of ``psi`` restricted to node k's neighborhood, ascending order."""
    return psi[:, topology.member_arrays[k - 1]]


def c_subspace_step(
    states: list[AgentState],
    samples: list[DataSample] | None,
    global_projector: Projector,
    *,
    tasks: list[RegressionTask] | None = None,
) -> list[AgentState]:
    """One iteration of the centralized projected strategy.

    Every node takes a gradient step, the stacked intermediate matrix is
    right-multiplied by the global coefficient-row-space projector, and each
    node keeps its own column of the result.
    """
    if global_projector.dim != len(states):
        raise ValueError(
            f"projector dimension {global_projector.dim} != node count {len(states)}"
        )
    psi = _adapt(states, samples, tasks)
    new_w = psi @ global_projector.matrix
    _check_bounded(new_w, states)
    return _rebuild(states, new_w)


def d_subspace_step(
    states: list[AgentState],
    samples: list[DataSample] | None,
    topology: NetworkTopology,
    index_map: IndexMap,
    local_subspaces,
    combination: CombinationMatrix,
    *,
    tasks: list[RegressionTask] | None = None,
) -> list[AgentState]:
    """One iteration of the distributed projected strategy.

    In order: per-node gradient steps; each node k stacks its neighborhood's
    intermediates into an (dim, |N_k|) matrix in ascending neighbor order and
    right-multiplies by its local projector; node k then collects, from each
    neighbor l, the column of l's projected matrix that sits at k's slot in
    l's neighborhood; the collected columns are blended with the combination
    weights of column k.
    """
    n = len(states)
    if topology.node_count != n or len(local_subspaces) != n:
        raise ValueError("states, topology and local subspaces must agree on N")
    psi = _adapt(states, samples, tasks)

    projected: list[np.ndarray] = []
    for k0 in range(n):
        local = local_subspaces[k0]
        if local.node != k0 + 1:
            raise ValueError("local subspaces are not aligned with states")
        block = psi[:, topology.member_arrays[k0]]
        if local.projector.dim != block.shape[1]:
            raise ValueError(
                f"node {k0 + 1}: projector dimension {local.projector.dim} "
                f"!= neighborhood size {block.shape[1]}"
            )
        projected.append(block @ local.projector.matrix)

    weights = combination.weights
    if weights.shape != (n, n):
        raise ValueError("combination matrix shape mismatch")
    new_w = np.empty_like(psi)
    for k0 in range(n):
        k = k0 + 1
        acc = np.zeros(psi.shape[0])
        for l in topology.neighborhoods[k0]:
            own_col = index_map.position(l, k) - 1
            acc += weights[l - 1, k0] * projected[l - 1][:, own_col]
        new_w[:, k0] = acc

    _check_bounded(new_w, states)
    return _rebuild(states, new_w)


def diffusion_baseline_step(
    states: list[AgentState],
    samples: list[DataSample] | None,
    topology: NetworkTopology,
    combination: CombinationMatrix,
    *,
    tasks: list[RegressionTask] | None = None,
) -> list[AgentState]:
    """Adapt-then-combine without any projection; the comparison baseline."""
    n = len(states)
    if topology.node_count != n:
        raise ValueError("topology node count != state count")
    if combination.weights.shape != (n, n):
        raise ValueError("combination matrix shape mismatch")
    psi = _adapt(states, samples, tasks)
    new_w = psi @ combination.weights
    _check_bounded(new_w, states)
    return _rebuild(states, new_w)
