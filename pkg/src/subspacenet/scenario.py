"""Synthetic low-rank multitask scenarios and streaming regression data.

A scenario is a network of nodes whose per-node optimal parameter vectors are
columns of a rank-deficient matrix: every column is a combination of the same
few basis vectors. Each node only ever sees its own data stream, generated
here as linear regression measurements d = u'w + noise.

All randomness derives from a single master seed through numpy SeedSequence
spawn keys, so results are reproducible and independent of evaluation order:

    (0,)              model generation (basis and coefficients)
    (1, run, node)    the data stream of one node in one Monte-Carlo run
    (2, run)          gaussian initialization of one run
    (3,)              random topology construction
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GenerationFailedError,
    InvalidRankError,
    NeighborhoodTooSmallError,
    ParseError,
    SingularGramError,
)
from .linalg import Projector, projector_from_coefficients
from .network import NetworkTopology, build_topology
from . import network as _network

_MODEL_KEY = 0
_DATA_KEY = 1
_INIT_KEY = 2
_TOPOLOGY_KEY = 3

#: Gram condition number up to which a local coefficient block counts as
#: full row rank during generation.
FULL_RANK_CONDITION = 1e10

#: Minimum smallest singular value accepted for generated coefficients.
MIN_SINGULAR_VALUE = 1e-3


def model_rng(master_seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(_MODEL_KEY,)))


def data_rng(master_seed: int, run_index: int, node: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(_DATA_KEY, run_index, node))
    )


def init_rng(master_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(_INIT_KEY, run_index))
    )


def topology_rng(master_seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(_TOPOLOGY_KEY,)))


# ---------------------------------------------------------------------------
# model types


@dataclass(frozen=True, eq=False)
class SubspaceModel:
    """Global low-rank model: optimal matrix = basis @ coefficients.

    basis is (dim, rank) with orthonormal columns, coefficients is
    (rank, node_count), w_star is their (dim, node_count) product; column k
    is the optimal parameter vector of node k.
    """

    dim: int
    node_count: int
    rank: int
    basis: np.ndarray
    coefficients: np.ndarray
    w_star: np.ndarray

    def __post_init__(self) -> None:
        for name in ("basis", "coefficients", "w_star"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if not 1 <= self.rank <= min(self.dim, self.node_count):
            raise InvalidRankError(
                f"rank {self.rank} outside 1..min({self.dim}, {self.node_count})"
            )
        if self.basis.shape != (self.dim, self.rank):
            raise ValueError("basis shape mismatch")
        if self.coefficients.shape != (self.rank, self.node_count):
            raise ValueError("coefficients shape mismatch")
        if self.w_star.shape != (self.dim, self.node_count):
            raise ValueError("w_star shape mismatch")
        scale = max(float(np.linalg.norm(self.w_star)), 1e-14)
        gap = float(np.linalg.norm(self.w_star - self.basis @ self.coefficients))
        if gap > 1e-13 * scale:
            raise ValueError("w_star does not reconstruct from basis and coefficients")
        smin = float(np.linalg.svd(self.coefficients, compute_uv=False)[-1])
        if smin <= 1e-8:
            raise ValueError(f"coefficient matrix is rank deficient (sigma_min={smin:.3e})")


@dataclass(frozen=True, eq=False)
class LocalSubspace:
    """Neighborhood-restricted model of one node.

    ``basis_rows`` lists which global coefficient rows are active on this
    neighborhood (1-based); ``coefficients`` is the corresponding
    (rank, |N_k|) block, columns in ascending neighbor order; ``projector``
    maps length-|N_k| row vectors onto its row space.
    """

    node: int
    rank: int
    basis_rows: tuple[int, ...]
    coefficients: np.ndarray
    projector: Projector


@dataclass(frozen=True, eq=False)
class RegressionTask:
    """Streaming least-squares task of one node: d = u'w_star + noise."""

    node: int
    w_star: np.ndarray
    input_covariance: np.ndarray
    noise_variance: float
    input_chol: np.ndarray | None = None

    def __post_init__(self) -> None:
        cov = np.asarray(self.input_covariance, dtype=np.float64)
        dim = self.w_star.shape[0]
        if cov.shape != (dim, dim):
            raise ValueError("input covariance shape mismatch")
        if float(np.abs(cov - cov.T).max()) > 1e-10 * max(1.0, float(np.abs(cov).max())):
            raise ValueError("input covariance must be symmetric")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be >= 0")
        if self.input_chol is None:
            try:
                chol = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError as exc:
                raise ValueError("input covariance must be positive definite") from exc
            object.__setattr__(self, "input_chol", chol)


@dataclass(frozen=True, slots=True)
class DataSample:
    """One regression measurement of one node at one time instant."""

    node: int
    time: int
    u: np.ndarray
    d: float


# ---------------------------------------------------------------------------
# generators


def _orthonormal_basis(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, rank)))
    return q


def generate_global_subspace(
    dim: int, node_count: int, rank: int, rng_seed: int
) -> SubspaceModel:
    """Draw a random global model: orthonormal basis, gaussian coefficients.

    Coefficients are redrawn until their smallest singular value exceeds
    ``MIN_SINGULAR_VALUE`` so the optimal matrix has rank exactly ``rank``.
    Deterministic for a fixed seed.
    """
    if not 1 <= rank <= min(dim, node_count):
        raise InvalidRankError(f"rank {rank} outside 1..min({dim}, {node_count})")
    rng = model_rng(rng_seed)
    basis = _orthonormal_basis(rng, dim, rank)
    for _ in range(100):
        coeff = rng.standard_normal((rank, node_count))
        if float(np.linalg.svd(coeff, compute_uv=False)[-1]) > MIN_SINGULAR_VALUE:
            break
    else:
        raise GenerationFailedError("no well-conditioned coefficient draw in 100 tries")
    return SubspaceModel(
        dim=dim,
        node_count=node_count,
        rank=rank,
        basis=basis,
        coefficients=coeff,
        w_star=basis @ coeff,
    )


def _contiguous_clusters(node_count: int, cluster_count: int) -> list[np.ndarray]:
    sizes = [
        node_count // cluster_count + (1 if i < node_count % cluster_count else 0)
        for i in range(cluster_count)
    ]
    bounds = np.cumsum([0] + sizes)
    return [np.arange(bounds[i], bounds[i + 1]) for i in range(cluster_count)]


def _support_rows(coefficients: np.ndarray, members: np.ndarray) -> tuple[int, ...]:
    active = np.any(coefficients[:, members] != 0.0, axis=1)
    return tuple(int(j) + 1 for j in np.nonzero(active)[0])


def _is_full_row_rank(block: np.ndarray) -> bool:
    s = np.linalg.svd(block, compute_uv=False)
    if s[-1] <= 0.0:
        return False
    return (s[0] / s[-1]) ** 2 <= FULL_RANK_CONDITION


def generate_clustered_coefficients(
    dim: int,
    node_count: int,
    rank: int,
    topology: NetworkTopology,
    rng_seed: int,
    *,
    cluster_count: int | None = None,
    max_tries: int = 100,
) -> SubspaceModel:
    """Draw a model whose coefficient rows have clustered column support.

    Nodes are split into contiguous clusters (one per coefficient row by
    default) and each cluster's columns are supported on its own row group
    alone, so neighborhoods interior to a cluster use fewer basis vectors
    than the global rank. With ``cluster_count=1`` every row is active
    everywhere and the structure matches the plain global generator. Entries
    are redrawn until every neighborhood's active coefficient block has full
    row rank.
    """
    if rank < 2:
        raise InvalidRankError("clustered generation requires rank >= 2")
    if rank > min(dim, node_count):
        raise InvalidRankError(f"rank {rank} outside 2..min({dim}, {node_count})")
    if topology.node_count != node_count:
        raise ValueError("topology node count does not match")
    if cluster_count is None:
        cluster_count = rank
    if not 1 <= cluster_count <= min(rank, node_count):
        raise ValueError(f"cluster_count outside 1..min({rank}, {node_count})")
    rng = model_rng(rng_seed)
    basis = _orthonormal_basis(rng, dim, rank)
    clusters = _contiguous_clusters(node_count, cluster_count)
    row_groups = _contiguous_clusters(rank, cluster_count)
    for _ in range(max_tries):
        coeff = np.zeros((rank, node_count))
        for rows, cols in zip(row_groups, clusters):
            coeff[np.ix_(rows, cols)] = rng.standard_normal((rows.size, cols.size))
        if float(np.linalg.svd(coeff, compute_uv=False)[-1]) <= MIN_SINGULAR_VALUE:
            continue
        ok = True
        for members in topology.member_arrays:
            rows = _support_rows(coeff, members)
            block = coeff[np.ix_([r - 1 for r in rows], members)]
            if not rows or not _is_full_row_rank(block):
                ok = False
                break
        if ok:
            return SubspaceModel(
                dim=dim,
                node_count=node_count,
                rank=rank,
                basis=basis,
                coefficients=coeff,
                w_star=basis @ coeff,
            )
    raise GenerationFailedError(
        f"no clustered coefficient draw satisfied the rank constraints in {max_tries} tries"
    )


def local_subspaces_from_rows(
    model: SubspaceModel,
    topology: NetworkTopology,
    rows_per_node,
    loading: float = 0.0,
) -> list[LocalSubspace]:
    """Build per-node restricted models from explicit row selections."""
    out: list[LocalSubspace] = []
    for k, rows in enumerate(rows_per_node, start=1):
        members = topology.member_arrays[k - 1]
        rows = tuple(int(r) for r in rows)
        block = model.coefficients[np.ix_([r - 1 for r in rows], members)]
        try:
            proj = projector_from_coefficients(block, loading)
        except SingularGramError as exc:
            raise SingularGramError(f"node {k}: {exc}") from exc
        out.append(
            LocalSubspace(
                node=k,
                rank=len(rows),
                basis_rows=rows,
                coefficients=block,
                projector=proj,
            )
        )
    return out


def derive_local_subspaces(
    model: SubspaceModel,
    topology: NetworkTopology,
    mode: str = "dense",
    loading: float = 0.0,
) -> list[LocalSubspace]:
    """Restrict the global model to each neighborhood.

    dense mode keeps every coefficient row and requires |N_k| >= rank;
    support mode keeps only rows with a nonzero entry on the neighborhood,
    which yields genuinely smaller local ranks for clustered coefficients.
    """
    if mode not in ("dense", "support"):
        raise ValueError(f"mode must be 'dense' or 'support', got {mode!r}")
    if topology.node_count != model.node_count:
        raise ValueError("topology node count does not match model")
    rows_per_node: list[tuple[int, ...]] = []
    for k, members in enumerate(topology.member_arrays, start=1):
        if mode == "dense":
            if members.size < model.rank:
                raise NeighborhoodTooSmallError(
                    f"node {k}: neighborhood size {members.size} < rank {model.rank}"
                )
            rows_per_node.append(tuple(range(1, model.rank + 1)))
        else:
            rows = _support_rows(model.coefficients, members)
            if not rows:
                raise SingularGramError(f"node {k}: no active coefficient rows")
            rows_per_node.append(rows)
    return local_subspaces_from_rows(model, topology, rows_per_node, loading)


# ---------------------------------------------------------------------------
# data streams


def ar1_covariance(dim: int, rho: float) -> np.ndarray:
    """Covariance with entries rho^|i-j|; identity for rho = 0."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")
    idx = np.arange(dim)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def make_tasks(
    model: SubspaceModel, *, correlation: float = 0.0, noise_variance: float
) -> list[RegressionTask]:
    """One regression task per node, all sharing the same input covariance."""
    cov = ar1_covariance(model.dim, correlation)
    chol = np.linalg.cholesky(cov)
    return [
        RegressionTask(
            node=k,
            w_star=model.w_star[:, k - 1].copy(),
            input_covariance=cov,
            noise_variance=float(noise_variance),
            input_chol=chol,
        )
        for k in range(1, model.node_count + 1)
    ]


def draw_sample(task: RegressionTask, rng: np.random.Generator, time: int = 0) -> DataSample:
    """Draw one measurement: u ~ N(0, cov), d = u'w_star + N(0, noise)."""
    u = task.input_chol @ rng.standard_normal(task.w_star.shape[0])
    v = rng.standard_normal() * math.sqrt(task.noise_variance)
    return DataSample(node=task.node, time=time, u=u, d=float(u @ task.w_star + v))


def generate_sample_arrays(
    tasks: list[RegressionTask], iterations: int, master_seed: int, run_index: int
) -> tuple[np.ndarray, np.ndarray]:
    """Whole data streams for one run: U is (T, N, dim), D is (T, N).

    Each node's stream comes from its own (run, node) generator, so streams
    are independent across nodes and identical no matter which algorithms
    later consume them.
    """
    n = len(tasks)
    dim = tasks[0].w_star.shape[0]
    u_all = np.empty((iterations, n, dim))
    d_all = np.empty((iterations, n))
    for k0, task in enumerate(tasks):
        rng = data_rng(master_seed, run_index, task.node)
        u = rng.standard_normal((iterations, dim)) @ task.input_chol.T
        v = rng.standard_normal(iterations) * math.sqrt(task.noise_variance)
        u_all[:, k0, :] = u
        d_all[:, k0] = u @ task.w_star + v
    return u_all, d_all


def stochastic_gradient(w: np.ndarray, sample: DataSample) -> np.ndarray:
    """Gradient of the squared error (d - u'w)^2 at w."""
    return -2.0 * sample.u * (sample.d - float(sample.u @ w))


def exact_gradient(w: np.ndarray, task: RegressionTask) -> np.ndarray:
    """Gradient of the expected squared error: 2 cov (w - w_star)."""
    return 2.0 * (task.input_covariance @ (w - task.w_star))


# ---------------------------------------------------------------------------
# scenario snapshot format
#
# Single text file: scalar header lines "key = value", then matrix sections.
# Floats are written with 17 significant digits, which round-trips float64
# exactly, so a reloaded scenario reproduces the optimal matrix bit for bit.


@dataclass(frozen=True, eq=False)
class ScenarioDump:
    model: SubspaceModel
    topology: NetworkTopology
    rows_per_node: tuple[tuple[int, ...], ...]
    seed: int
    generator: str
    local_mode: str
    loading: float


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def dump_scenario(
    model: SubspaceModel,
    topology: NetworkTopology,
    rows_per_node,
    *,
    seed: int,
    generator: str,
    local_mode: str,
    loading: float,
) -> str:
    lines = [
        "# scenario snapshot; reload with subspacenet.scenario.load_scenario",
        "format = 1",
        f"L = {model.dim}",
        f"N = {model.node_count}",
        f"r_star = {model.rank}",
        f"seed = {seed}",
        f"generator = {generator}",
        f"local_mode = {local_mode}",
        f"loading = {_fmt(loading)}",
        "[basis]",
    ]
    lines.extend(" ".join(_fmt(x) for x in row) for row in model.basis)
    lines.append("[coefficients]")
    lines.extend(" ".join(_fmt(x) for x in row) for row in model.coefficients)
    lines.append("[edges]")
    lines.extend(f"{u} {v}" for u, v in topology.edges())
    lines.append("[basis_rows]")
    lines.extend(
        f"{k}: " + " ".join(str(r) for r in rows)
        for k, rows in enumerate(rows_per_node, start=1)
    )
    return "\n".join(lines) + "\n"


def _parse_matrix(rows: list[tuple[int, str]], shape: tuple[int, int], name: str) -> np.ndarray:
    if len(rows) != shape[0]:
        raise ParseError(f"section [{name}] has {len(rows)} rows, expected {shape[0]}")
    out = np.empty(shape)
    for i, (lineno, line) in enumerate(rows):
        parts = line.split()
        if len(parts) != shape[1]:
            raise ParseError(
                f"[{name}] row has {len(parts)} entries, expected {shape[1]}", line=lineno
            )
        try:
            out[i] = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"[{name}] row contains a non-numeric entry", line=lineno) from None
    return out


def load_scenario(text: str) -> ScenarioDump:
    """Parse a scenario snapshot back into model, topology and row choices."""
    header: dict[str, str] = {}
    sections: dict[str, list[tuple[int, str]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", line=lineno)
            sections[current] = []
        elif current is not None:
            sections[current].append((lineno, line))
        else:
            if "=" not in line:
                raise ParseError(f"expected 'key = value', got {raw!r}", line=lineno)
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()

    def _header_int(key: str) -> int:
        try:
            return int(header[key])
        except KeyError:
            raise ParseError(f"missing header key {key!r}") from None
        except ValueError:
            raise ParseError(f"header key {key!r} is not an integer") from None

    if header.get("format") != "1":
        raise ParseError("unsupported or missing snapshot format version")
    dim = _header_int("L")
    node_count = _header_int("N")
    rank = _header_int("r_star")
    seed = _header_int("seed")
    generator = header.get("generator", "global")
    local_mode = header.get("local_mode", "dense")
    try:
        loading = float(header.get("loading", "0"))
    except ValueError:
        raise ParseError("header key 'loading' is not a number") from None

    for name in ("basis", "coefficients", "edges", "basis_rows"):
        if name not in sections:
            raise ParseError(f"missing section [{name}]")

    basis = _parse_matrix(sections["basis"], (dim, rank), "basis")
    coeff = _parse_matrix(sections["coefficients"], (rank, node_count), "coefficients")
    edge_text = "\n".join(line for _, line in sections["edges"])
    topology = build_topology(_network.parse_edge_list(edge_text), node_count)

    rows_entries = sections["basis_rows"]
    if len(rows_entries) != node_count:
        raise ParseError(f"[basis_rows] has {len(rows_entries)} lines, expected {node_count}")
    rows_per_node: list[tuple[int, ...]] = []
    for expected, (lineno, line) in enumerate(rows_entries, start=1):
        head, _, tail = line.partition(":")
        try:
            node = int(head)
            rows = tuple(int(p) for p in tail.split())
        except ValueError:
            raise ParseError("malformed [basis_rows] line", line=lineno) from None
        if node != expected:
            raise ParseError(f"[basis_rows] out of order: got node {node}", line=lineno)
        if any(not 1 <= r <= rank for r in rows):
            raise ParseError("[basis_rows] entry outside 1..r_star", line=lineno)
        rows_per_node.append(rows)

    model = SubspaceModel(
        dim=dim,
        node_count=node_count,
        rank=rank,
        basis=basis,
        coefficients=coeff,
        w_star=basis @ coeff,
    )
    return ScenarioDump(
        model=model,
        topology=topology,
        rows_per_node=tuple(rows_per_node),
        seed=seed,
        generator=generator,
        local_mode=local_mode,
        loading=loading,
    )
