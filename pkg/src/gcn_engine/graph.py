"""
Graph Construction
------------------
Builds the node graph used by the GCN from tabular features and computes the
propagation matrix

    Â = D̃^{-1/2} (A + I) D̃^{-1/2},   d̃ᵢ = Σⱼ (A + I)ᵢⱼ

- k-NN construction (Euclidean or cosine), union-symmetrised, ties broken by
  lower node index.
- Induced subgraphs (meta graph) with Â recomputed on the kept nodes.
- Attaching new nodes (SMOTE synthetic rows) to an existing graph.
- Plain-text edge list export and import.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from src.gcn_engine.constants import DEFAULT_KNN_K, DEFAULT_KNN_METRIC
from src.gcn_engine.exceptions import ContractViolation, DataError, ParameterError
from src.gcn_engine.linalg import SparseMatrix, as_csr, as_dense, is_structurally_symmetric
from src.utils.logger import logger


class DistanceMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


# =========================================================
# 🕸️ Graph Container
# =========================================================
@dataclass(frozen=True)
class GraphData:
    """Binary symmetric adjacency plus its renormalized propagation matrix."""
    adjacency: SparseMatrix
    a_hat: SparseMatrix

    @classmethod
    def from_adjacency(cls, adjacency) -> "GraphData":
        adjacency = as_csr(adjacency)
        return cls(adjacency=adjacency, a_hat=normalize_adjacency(adjacency))

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        """Undirected edge count."""
        return self.adjacency.nnz // 2

    def edges(self) -> np.ndarray:
        """(E, 2) array of undirected edges with i < j, sorted lexicographically."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        pairs = np.column_stack([upper.row, upper.col]).astype(np.int64)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]


# =========================================================
# 📐 Renormalized Adjacency
# =========================================================
def _validate_adjacency(adjacency: SparseMatrix) -> None:
    n_rows, n_cols = adjacency.shape
    if n_rows != n_cols:
        raise ContractViolation(f"adjacency must be square, got {adjacency.shape}")
    if adjacency.nnz and not np.all(adjacency.data == 1.0):
        raise ContractViolation("adjacency must be binary (entries in {0, 1})")
    if np.any(adjacency.diagonal() != 0):
        raise ContractViolation("adjacency must have a zero diagonal")
    if not is_structurally_symmetric(adjacency):
        raise ContractViolation("adjacency must be symmetric")


def normalize_adjacency(adjacency) -> SparseMatrix:
    """Return Â = D̃^{-1/2}(A + I)D̃^{-1/2} for a binary symmetric zero-diagonal A."""
    adjacency = as_csr(adjacency)
    _validate_adjacency(adjacency)

    n = adjacency.shape[0]
    a_tilde = (adjacency + sp.identity(n, dtype=np.float64, format="csr")).tocoo()
    degrees = np.asarray(a_tilde.sum(axis=1)).ravel()

    # 1/sqrt(d_i d_j): symmetric bit-for-bit and exactly 1/d_i on the diagonal
    values = a_tilde.data / np.sqrt(degrees[a_tilde.row] * degrees[a_tilde.col])
    a_hat = sp.csr_matrix((values, (a_tilde.row, a_tilde.col)), shape=(n, n))
    a_hat.sort_indices()
    return a_hat


# =========================================================
# 📏 Nearest Neighbours
# =========================================================
def _pairwise_distances(query: np.ndarray, base: np.ndarray, metric: DistanceMetric) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        distances = cdist(query, base, metric=metric.value)
    # cosine distance is undefined for all-zero rows; treat them as orthogonal
    return np.where(np.isnan(distances), 1.0, distances)


def _k_nearest(distances: np.ndarray, k: int) -> np.ndarray:
    """Column indices of the k smallest entries per row; stable sort keeps lower index on ties."""
    return np.argsort(distances, axis=1, kind="stable")[:, :k]


def _symmetric_binary(rows: np.ndarray, cols: np.ndarray, n: int) -> SparseMatrix:
    directed = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    undirected = directed.maximum(directed.T)
    undirected.data[:] = 1.0
    return as_csr(undirected)


def knn_graph(features, k: int = DEFAULT_KNN_K, metric: DistanceMetric | str = DEFAULT_KNN_METRIC) -> GraphData:
    """
    Connect each node to its k nearest neighbours and symmetrise by union.

    Args:
        features: (N, F) standardized feature matrix.
        k: neighbours per node, 1 ≤ k < N.
        metric: "euclidean" or "cosine".

    Returns:
        GraphData with binary adjacency and Â.
    """
    x = as_dense(features, "features")
    metric = DistanceMetric(metric)
    n = x.shape[0]
    if not 1 <= k < n:
        raise ParameterError(f"k must satisfy 1 <= k < N (got k={k}, N={n})")

    distances = _pairwise_distances(x, x, metric)
    np.fill_diagonal(distances, np.inf)
    neighbours = _k_nearest(distances, k)

    rows = np.repeat(np.arange(n), k)
    adjacency = _symmetric_binary(rows, neighbours.ravel(), n)
    graph = GraphData.from_adjacency(adjacency)
    logger.debug(f"[GRAPH] k-NN graph: N={n}, k={k}, metric={metric.value}, edges={graph.n_edges}")
    return graph


# =========================================================
# ✂️ Subgraphs & Extensions
# =========================================================
def induced_subgraph(g: GraphData, nodes: Sequence[int]) -> GraphData:
    """Subgraph on `nodes` (in the given order) keeping exactly the edges among them."""
    idx = np.asarray(nodes, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ParameterError("induced_subgraph needs at least one node")
    if np.any(idx < 0) or np.any(idx >= g.n_nodes):
        raise ParameterError(f"node index out of range [0, {g.n_nodes})")
    if np.unique(idx).size != idx.size:
        raise ParameterError("node indices must be unique")

    sub = g.adjacency[idx][:, idx]
    return GraphData.from_adjacency(sub)


def attach_nodes(
    g: GraphData,
    base_features,
    new_features,
    k: int = DEFAULT_KNN_K,
    metric: DistanceMetric | str = DEFAULT_KNN_METRIC,
) -> GraphData:
    """
    Append nodes N..N+S-1, each linked to its k nearest base nodes.
    Base-to-base edges are kept as they are; new nodes are never linked to each other.
    """
    base = as_dense(base_features, "base_features")
    new = as_dense(new_features, "new_features")
    metric = DistanceMetric(metric)
    n, s = base.shape[0], new.shape[0]
    if base.shape[0] != g.n_nodes:
        raise ParameterError(f"base_features has {base.shape[0]} rows, graph has {g.n_nodes} nodes")
    if s == 0:
        return g
    if not 1 <= k <= n:
        raise ParameterError(f"k must satisfy 1 <= k <= N (got k={k}, N={n})")

    neighbours = _k_nearest(_pairwise_distances(new, base, metric), k)
    rows = np.repeat(np.arange(s), k)
    link = sp.csr_matrix((np.ones(s * k), (rows, neighbours.ravel())), shape=(s, n))

    adjacency = sp.bmat([[g.adjacency, link.T], [link, None]], format="csr")
    adjacency.data[:] = 1.0
    graph = GraphData.from_adjacency(adjacency)
    logger.debug(f"[GRAPH] Attached {s} nodes to {n}-node graph ({graph.n_edges} edges).")
    return graph


# =========================================================
# 💾 Export
# =========================================================
def write_edge_list(g: GraphData, path: str | Path) -> Path:
    """Write undirected edges once per line as 'i j' (0-based)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{i} {j}" for i, j in g.edges()]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    logger.debug(f"[GRAPH] Edge list saved: {path} ({len(lines)} edges)")
    return path


def read_edge_list(path: str | Path, n_nodes: int) -> GraphData:
    """Graph on n_nodes nodes from 'i j' lines; blank lines and '#' comments are skipped."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"edge list not found: {path}")

    rows, cols = [], []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) != 2 or not all(f.isdigit() for f in fields):
            raise DataError(f"{path}: line {line_no} is not 'i j': '{line}'")
        i, j = int(fields[0]), int(fields[1])
        if i >= n_nodes or j >= n_nodes:
            raise DataError(f"{path}: line {line_no} references a node outside [0, {n_nodes})")
        if i == j:
            raise DataError(f"{path}: line {line_no} is a self-loop")
        rows.append(i)
        cols.append(j)

    adjacency = _symmetric_binary(np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64), n_nodes)
    graph = GraphData.from_adjacency(adjacency)
    logger.debug(f"[GRAPH] Edge list loaded: {path} ({graph.n_edges} edges)")
    return graph
