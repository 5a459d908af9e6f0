"""Graph data model and graph-level operations.

A graph is an immutable value: a symmetric zero-diagonal adjacency matrix
with entries in [0, 1] (binary for clean graphs, fractional for relaxed
attacked ones), a dense node-feature matrix, and optional integer labels
with -1 marking unlabeled nodes. All stochastic operations draw from an
explicit RngStream so results are reproducible from a seed.

File formats (all UTF-8 text):
  * edge file     -- one "u v" pair of 0-based node ids per line; undirected;
                     blank lines and lines starting with '#' are ignored.
  * feature file  -- n lines of d space-separated reals.
  * label file    -- n lines, one integer per line, -1 for unlabeled.
  * export sidecar-- JSON {"n": ..., "d": ..., "edges": ...} for integrity checks.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, DomainError, IngestionError
from .rng import RngStream
from .validation import (
    as_matrix,
    check_adjacency,
    check_binary,
    check_finite,
    check_probability,
)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable graph value. Arrays are frozen in place at construction."""

    adjacency: np.ndarray
    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        adj = as_matrix(self.adjacency, "adjacency")
        feats = as_matrix(self.features, "features")
        check_adjacency(adj, "adjacency")
        check_finite(adj, "adjacency")
        check_finite(feats, "features")
        if feats.shape[0] != adj.shape[0]:
            raise ContractViolationError(
                f"feature rows ({feats.shape[0]}) must match node count ({adj.shape[0]})"
            )
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (adj.shape[0],):
                raise ContractViolationError("labels must be a vector of length n")
            if labels.min(initial=0) < -1:
                raise ContractViolationError("labels must be >= -1 (-1 = unlabeled)")
        for name, arr in (("adjacency", adj), ("features", feats), ("labels", labels)):
            if arr is not None:
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def is_binary(self) -> bool:
        return bool(np.all((self.adjacency == 0.0) | (self.adjacency == 1.0)))

    def num_edges(self) -> int:
        """Number of unordered node pairs with a nonzero adjacency entry."""
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))


@dataclass(frozen=True)
class GraphView:
    """An augmented copy of a graph plus the provenance of the transformation."""

    graph: Graph
    dropped_edges: frozenset = field(default_factory=frozenset)
    masked_dims: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class SubgraphHandle:
    """An induced subgraph together with the map back to original node ids."""

    graph: Graph
    node_map: np.ndarray

    def __post_init__(self):
        node_map = np.asarray(self.node_map, dtype=np.int64)
        if len(np.unique(node_map)) != len(node_map):
            raise ContractViolationError("node_map entries must be distinct")
        node_map.setflags(write=False)
        object.__setattr__(self, "node_map", node_map)


# ---------------------------------------------------------------------------
# adjacency algebra
# ---------------------------------------------------------------------------


def normalized_adjacency_parts(A: np.ndarray):
    """Self-loop-augmented adjacency, its degrees, inverse-sqrt degrees, and
    the symmetrically normalized matrix. Shared by the public normalizer and
    the encoder (which needs the intermediates for its backward pass)."""
    A_tilde = A + np.eye(A.shape[0])
    deg = A_tilde.sum(axis=1)  # >= 1 because of the self-loop
    inv_sqrt = deg**-0.5
    A_hat = inv_sqrt[:, None] * A_tilde * inv_sqrt[None, :]
    return A_tilde, deg, inv_sqrt, A_hat


def normalize_adjacency(A) -> np.ndarray:
    """Symmetrically normalized adjacency with self-loops added.

    Divides each entry of A + I by the square roots of the row and column
    degree of A + I; row sums of A + I are at least 1, so this is always
    well defined.
    """
    A = as_matrix(A, "adjacency")
    check_adjacency(A, "adjacency")
    return normalized_adjacency_parts(A)[3]


def complement_mask(A) -> np.ndarray:
    """Signed edit directions for a binary adjacency: +1 where an edge can be
    added, -1 where one can be removed, 0 on the diagonal."""
    A = as_matrix(A, "adjacency")
    check_adjacency(A, "adjacency")
    check_binary(A, "adjacency")
    C = 1.0 - 2.0 * A
    np.fill_diagonal(C, 0.0)
    return C


def upper_pairs(n: int):
    """(i, j) index arrays of all unordered non-diagonal pairs, row-major."""
    return np.triu_indices(n, k=1)


# ---------------------------------------------------------------------------
# stochastic transformations
# ---------------------------------------------------------------------------


def augment(G: Graph, p_edge: float, p_feat: float, rng: RngStream) -> GraphView:
    """Random edge dropping and feature-dimension masking.

    Each existing unordered edge is dropped independently with probability
    p_edge; each feature column is zeroed across all nodes independently
    with probability p_feat. Draw order is fixed (edges in row-major pair
    order, then columns) so results are reproducible.
    """
    check_probability(p_edge, "p_edge")
    check_probability(p_feat, "p_feat")
    if not G.is_binary():
        raise ContractViolationError("augment requires a binary graph")
    iu, ju = upper_pairs(G.n)
    on = G.adjacency[iu, ju] == 1.0
    ei, ej = iu[on], ju[on]
    drop = rng.bernoulli(p_edge, size=ei.size).astype(bool)
    adj = np.array(G.adjacency)
    adj[ei[drop], ej[drop]] = 0.0
    adj[ej[drop], ei[drop]] = 0.0
    mask = rng.bernoulli(p_feat, size=G.d).astype(bool)
    feats = np.array(G.features)
    feats[:, mask] = 0.0
    view = Graph(adj, feats, G.labels)
    dropped = frozenset((int(a), int(b)) for a, b in zip(ei[drop], ej[drop]))
    masked = frozenset(int(k) for k in np.flatnonzero(mask))
    return GraphView(graph=view, dropped_edges=dropped, masked_dims=masked)


def sample_subgraph(G: Graph, m: int, rng: RngStream) -> SubgraphHandle:
    """Induced subgraph on m nodes drawn uniformly without replacement."""
    if not 1 <= m <= G.n:
        raise DomainError(f"subgraph size must be in [1, {G.n}], got {m}")
    nodes = np.sort(rng.choice_no_replace(G.n, m))
    adj = G.adjacency[np.ix_(nodes, nodes)]
    feats = G.features[nodes]
    labels = None if G.labels is None else G.labels[nodes]
    return SubgraphHandle(graph=Graph(adj, feats, labels), node_map=nodes)


def degrade_sequence(G: Graph, p: float, steps: int, rng: RngStream) -> list[Graph]:
    """Iterative degradation: at each step every surviving edge is dropped
    with probability p and every still-unmasked feature dimension is masked
    with probability p. Masks are cumulative. Returns [G_0, ..., G_steps]."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"degradation probability must be in (0, 1), got {p}")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    if not G.is_binary():
        raise ContractViolationError("degrade_sequence requires a binary graph")
    seq = [G]
    adj = np.array(G.adjacency)
    unmasked = np.ones(G.d, dtype=bool)
    iu, ju = upper_pairs(G.n)
    for _ in range(steps):
        on = adj[iu, ju] == 1.0
        ei, ej = iu[on], ju[on]
        drop = rng.bernoulli(p, size=ei.size).astype(bool)
        adj[ei[drop], ej[drop]] = 0.0
        adj[ej[drop], ei[drop]] = 0.0
        alive = np.flatnonzero(unmasked)
        newly = rng.bernoulli(p, size=alive.size).astype(bool)
        unmasked[alive[newly]] = False
        feats = np.array(G.features)
        feats[:, ~unmasked] = 0.0
        seq.append(Graph(adj.copy(), feats, G.labels))
    return seq


def generate_sbm(
    block_sizes,
    p_in: float,
    p_out: float,
    d: int,
    rng: RngStream,
    mean_scale: float = 1.0,
) -> Graph:
    """Stochastic block model with community labels and Gaussian features.

    Nodes in the same block connect with probability p_in, across blocks
    with p_out. Features are a per-block mean vector (standard normal draws
    scaled by mean_scale) plus unit Gaussian noise; labels are block ids.
    """
    check_probability(p_in, "p_in")
    check_probability(p_out, "p_out")
    block_sizes = [int(b) for b in block_sizes]
    if any(b <= 0 for b in block_sizes):
        raise DomainError("block sizes must be positive")
    labels = np.concatenate([np.full(b, k, dtype=np.int64) for k, b in enumerate(block_sizes)])
    n = labels.size
    iu, ju = upper_pairs(n)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    edges = rng.uniform(iu.size) < prob
    adj = np.zeros((n, n))
    adj[iu[edges], ju[edges]] = 1.0
    adj[ju[edges], iu[edges]] = 1.0
    means = rng.gaussian((len(block_sizes), d)) * mean_scale
    feats = means[labels] + rng.gaussian((n, d))
    return Graph(adj, feats, labels)


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------


def _parse_features(path: str) -> np.ndarray:
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                row = [float(t) for t in tokens]
            except ValueError:
                raise IngestionError("unparsable feature value", path, lineno) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise IngestionError(
                    f"ragged feature row (expected {width} values, got {len(row)})",
                    path,
                    lineno,
                )
            rows.append(row)
    if not rows:
        raise IngestionError("feature file is empty", path)
    return np.asarray(rows, dtype=np.float64)


def load_graph(edge_path: str, feature_path: str, label_path: str | None = None) -> Graph:
    """Load a graph from the standard text formats.

    Edges are deduplicated and symmetrized; self-loops in the input are
    dropped (with a warning reporting how many). Node count comes from the
    feature file.
    """
    feats = _parse_features(feature_path)
    n = feats.shape[0]
    adj = np.zeros((n, n))
    self_loops = 0
    with open(edge_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise IngestionError(
                    f"expected 'u v', got {len(tokens)} tokens", edge_path, lineno
                )
            try:
                u, v = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise IngestionError("unparsable node id", edge_path, lineno) from None
            if not (0 <= u < n and 0 <= v < n):
                raise IngestionError(
                    f"node id out of range [0, {n}): ({u}, {v})", edge_path, lineno
                )
            if u == v:
                self_loops += 1
                continue
            adj[u, v] = 1.0
            adj[v, u] = 1.0
    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop(s) from {edge_path}", stacklevel=2)
    labels = None
    if label_path is not None:
        values = []
        with open(label_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    values.append(int(line))
                except ValueError:
                    raise IngestionError("unparsable label", label_path, lineno) from None
        if len(values) != n:
            raise IngestionError(
                f"expected {n} labels, got {len(values)}", label_path
            )
        labels = np.asarray(values, dtype=np.int64)
    return Graph(adj, feats, labels)


def save_graph(G: Graph, edge_path: str, feature_path: str, label_path: str, sidecar_path: str) -> None:
    """Write a graph in the standard text formats plus the JSON sidecar."""
    if not G.is_binary():
        raise ContractViolationError("only binary graphs can be exported")
    iu, ju = upper_pairs(G.n)
    on = G.adjacency[iu, ju] == 1.0
    with open(edge_path, "w", encoding="utf-8") as fh:
        for u, v in zip(iu[on], ju[on]):
            fh.write(f"{u} {v}\n")
    with open(feature_path, "w", encoding="utf-8") as fh:
        for row in G.features:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
    labels = G.labels if G.labels is not None else np.full(G.n, -1, dtype=np.int64)
    with open(label_path, "w", encoding="utf-8") as fh:
        for y in labels:
            fh.write(f"{int(y)}\n")
    sidecar = {"n": G.n, "d": G.d, "edges": G.num_edges()}
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")
