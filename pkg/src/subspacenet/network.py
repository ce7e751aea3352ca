"""Graph topology, neighborhood bookkeeping and combination matrices.

Node indices are 1-based in every public structure and file format, matching
the usual agent numbering in the adaptive-networks literature. Neighborhoods
always contain the node itself and are kept in strictly ascending order;
that ordering fixes the column layout of every per-neighborhood matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DisconnectedGraphError,
    InvalidNodeIndexError,
    NotANeighborError,
    ParseError,
)

#: Tolerance for the combination-matrix constraint checks.
COMBINATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    """Connected undirected graph with self-inclusive sorted neighborhoods."""

    node_count: int
    adjacency: np.ndarray  # bool (N, N), symmetric, True on the diagonal
    neighborhoods: tuple[tuple[int, ...], ...]  # 1-based, ascending, self included
    member_arrays: tuple[np.ndarray, ...]  # same content, 0-based int arrays

    def neighbors(self, k: int) -> tuple[int, ...]:
        _check_node(self, k)
        return self.neighborhoods[k - 1]

    def degree(self, k: int) -> int:
        """Neighborhood size |N_k| including the node itself."""
        return len(self.neighbors(k))

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edge list (u < v), self links omitted."""
        out = []
        for k, nbrs in enumerate(self.neighborhoods, start=1):
            out.extend((k, l) for l in nbrs if l > k)
        return out


@dataclass(frozen=True, eq=False)
class IndexMap:
    """Per-node positions of each neighbor inside the sorted neighborhood."""

    positions: tuple[dict[int, int], ...]  # positions[k-1][l] == 1-based slot of l

    def position(self, k: int, l: int) -> int:
        """1-based column slot of node ``l`` inside node ``k``'s neighborhood."""
        try:
            return self.positions[k - 1][l]
        except KeyError:
            raise NotANeighborError(f"node {l} is not in the neighborhood of {k}") from None
        except IndexError:
            raise InvalidNodeIndexError(f"node {k} outside 1..{len(self.positions)}") from None


@dataclass(frozen=True, eq=False)
class CombinationMatrix:
    """Nonnegative weights, column k supported on N_k and summing to one.

    ``weights[l-1, k-1]`` is the weight node k assigns to neighbor l.
    """

    weights: np.ndarray
    rule: str = ""


@dataclass(frozen=True)
class CombinationViolation:
    """One failed combination-matrix constraint.

    ``kind`` is one of ``negative_entry``, ``outside_support``, ``column_sum``;
    ``node_l`` is None for column-sum violations.
    """

    kind: str
    node_k: int
    node_l: int | None
    magnitude: float


def _check_node(topology: NetworkTopology, k: int) -> None:
    if not 1 <= k <= topology.node_count:
        raise InvalidNodeIndexError(f"node {k} outside 1..{topology.node_count}")


def build_topology(edge_list, node_count: int) -> NetworkTopology:
    """Build a validated topology from an undirected edge list.

    Self loops in the input are ignored (self membership is implicit).

    Raises
    ------
    InvalidNodeIndexError
        For an endpoint outside 1..node_count.
    DisconnectedGraphError
        If the resulting graph is not connected.
    """
    if node_count < 1:
        raise InvalidNodeIndexError("node_count must be >= 1")
    adj = np.zeros((node_count, node_count), dtype=bool)
    for u, v in edge_list:
        u, v = int(u), int(v)
        for node in (u, v):
            if not 1 <= node <= node_count:
                raise InvalidNodeIndexError(f"edge endpoint {node} outside 1..{node_count}")
        if u != v:
            adj[u - 1, v - 1] = True
            adj[v - 1, u - 1] = True
    np.fill_diagonal(adj, True)

    # breadth-first reachability from node 1
    seen = np.zeros(node_count, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.nonzero(adj[i])[0]:
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    if not seen.all():
        missing = [int(j) + 1 for j in np.nonzero(~seen)[0]]
        raise DisconnectedGraphError(f"graph is not connected; unreachable nodes: {missing}")

    neighborhoods = tuple(
        tuple(int(j) + 1 for j in np.nonzero(adj[i])[0]) for i in range(node_count)
    )
    member_arrays = tuple(np.nonzero(adj[i])[0].astype(np.intp) for i in range(node_count))
    return NetworkTopology(
        node_count=node_count,
        adjacency=adj,
        neighborhoods=neighborhoods,
        member_arrays=member_arrays,
    )


def column_index(topology: NetworkTopology, k: int, l: int) -> int:
    """1-based rank of node ``l`` inside the ascending neighborhood of ``k``."""
    _check_node(topology, k)
    nbrs = topology.neighborhoods[k - 1]
    try:
        return nbrs.index(l) + 1
    except ValueError:
        raise NotANeighborError(f"node {l} is not in the neighborhood of {k}") from None


def build_index_map(topology: NetworkTopology) -> IndexMap:
    positions = tuple(
        {l: i + 1 for i, l in enumerate(nbrs)} for nbrs in topology.neighborhoods
    )
    return IndexMap(positions=positions)


def uniform_combination(topology: NetworkTopology) -> CombinationMatrix:
    """Equal weight 1/|N_k| on every member of each neighborhood."""
    n = topology.node_count
    a = np.zeros((n, n))
    for k0, members in enumerate(topology.member_arrays):
        a[members, k0] = 1.0 / len(members)
    return CombinationMatrix(weights=a, rule="uniform")


def metropolis_combination(topology: NetworkTopology) -> CombinationMatrix:
    """Metropolis weights 1/max(|N_k|, |N_l|) off the diagonal; symmetric."""
    n = topology.node_count
    sizes = [len(m) for m in topology.member_arrays]
    a = np.zeros((n, n))
    for k0, members in enumerate(topology.member_arrays):
        for l0 in members:
            if l0 != k0:
                a[l0, k0] = 1.0 / max(sizes[k0], sizes[l0])
        a[k0, k0] = 1.0 - a[:, k0].sum()
    return CombinationMatrix(weights=a, rule="metropolis")


def identity_combination(topology: NetworkTopology) -> CombinationMatrix:
    """Weight 1 on the node itself; disables neighbor mixing."""
    return CombinationMatrix(weights=np.eye(topology.node_count), rule="identity")


def validate_combination(a, topology: NetworkTopology) -> list[CombinationViolation]:
    """Check the three combination constraints, returning violations as data.

    Accepts a raw (N, N) array or a CombinationMatrix. An empty list means
    all columns are nonnegative, supported on their neighborhood, and sum to
    one within ``COMBINATION_TOL``.
    """
    w = a.weights if isinstance(a, CombinationMatrix) else np.asarray(a, dtype=np.float64)
    n = topology.node_count
    if w.shape != (n, n):
        raise ValueError(f"combination matrix must be {n}x{n}")
    out: list[CombinationViolation] = []
    for k0 in range(n):
        col = w[:, k0]
        support = topology.adjacency[:, k0]
        for l0 in np.nonzero(col < -COMBINATION_TOL)[0]:
            out.append(
                CombinationViolation("negative_entry", k0 + 1, int(l0) + 1, float(-col[l0]))
            )
        for l0 in np.nonzero((~support) & (np.abs(col) > COMBINATION_TOL))[0]:
            out.append(
                CombinationViolation("outside_support", k0 + 1, int(l0) + 1, float(abs(col[l0])))
            )
        gap = abs(float(col.sum()) - 1.0)
        if gap > COMBINATION_TOL:
            out.append(CombinationViolation("column_sum", k0 + 1, None, gap))
    return out


# ---------------------------------------------------------------------------
# standard topologies

def ring_topology(node_count: int) -> NetworkTopology:
    edges = [(k, k % node_count + 1) for k in range(1, node_count + 1)] if node_count > 1 else []
    return build_topology(edges, node_count)


def full_topology(node_count: int) -> NetworkTopology:
    edges = [(u, v) for u in range(1, node_count + 1) for v in range(u + 1, node_count + 1)]
    return build_topology(edges, node_count)


def star_topology(node_count: int) -> NetworkTopology:
    """Node 1 is the hub."""
    edges = [(1, v) for v in range(2, node_count + 1)]
    return build_topology(edges, node_count)


def random_connected_topology(
    node_count: int,
    edge_probability: float,
    rng: np.random.Generator,
    *,
    min_size: int = 1,
    max_tries: int = 1000,
) -> NetworkTopology:
    """Erdos-Renyi graph resampled until connected with |N_k| >= min_size."""
    if not 0.0 < edge_probability <= 1.0:
        raise ValueError("edge_probability must be in (0, 1]")
    for _ in range(max_tries):
        mask = rng.random((node_count, node_count)) < edge_probability
        edges = [
            (u + 1, v + 1)
            for u in range(node_count)
            for v in range(u + 1, node_count)
            if mask[u, v]
        ]
        try:
            topo = build_topology(edges, node_count)
        except DisconnectedGraphError:
            continue
        if all(len(nbrs) >= min_size for nbrs in topo.neighborhoods):
            return topo
    raise DisconnectedGraphError(
        f"no connected graph with min neighborhood {min_size} found in {max_tries} draws"
    )


# ---------------------------------------------------------------------------
# edge-list text format: one "u v" pair per line, 1-based, '#' comments

def parse_edge_list(text: str) -> list[tuple[int, int]]:
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {raw!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node index in {raw!r}", line=lineno) from None
        edges.append((u, v))
    return edges


def format_edge_list(topology: NetworkTopology) -> str:
    lines = [f"{u} {v}" for u, v in topology.edges()]
    return "\n".join(lines) + ("\n" if lines else "")


def load_topology(text: str, node_count: int | None = None) -> NetworkTopology:
    """Parse edge-list text; infer the node count from the largest index if
    not given explicitly."""
    edges = parse_edge_list(text)
    if node_count is None:
        if not edges:
            raise ParseError("empty edge list and no node count given")
        node_count = max(max(u, v) for u, v in edges)
    return build_topology(edges, node_count)
