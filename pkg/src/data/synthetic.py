"""
Synthetic Datasets
------------------
Small generated node-classification problems for demos and tests.

- Two moons: 2-D features carry the signal; the k-NN graph follows them.
- Communities: features are pure noise and a planted-partition graph whose
  blocks match the labels is the only signal.
"""

from typing import Tuple

import numpy as np
import scipy.sparse as sp
from sklearn.datasets import make_moons

from src.data.datasets import TabularDataset
from src.gcn_engine.exceptions import ParameterError
from src.gcn_engine.graph import GraphData
from src.utils.logger import logger


def _minority_counts(n_nodes: int, minority_fraction: float) -> Tuple[int, int]:
    if not 0 < minority_fraction <= 0.5:
        raise ParameterError(f"minority_fraction must lie in (0, 0.5], got {minority_fraction}")
    n_minority = int(round(n_nodes * minority_fraction))
    if n_minority < 1 or n_minority >= n_nodes:
        raise ParameterError(f"{n_nodes} nodes leave no room for both classes")
    return n_nodes - n_minority, n_minority


# =========================================================
# 🌙 Two Moons
# =========================================================
def make_two_moons_dataset(
    n_nodes: int = 40,
    minority_fraction: float = 0.5,
    noise: float = 0.1,
    seed: int = 0,
) -> TabularDataset:
    """Interleaved half circles; class 1 (the minority) is the lower moon."""
    n_majority, n_minority = _minority_counts(n_nodes, minority_fraction)
    x, y = make_moons(n_samples=(n_majority, n_minority), noise=noise, random_state=seed)
    dataset = TabularDataset(features=x, labels=y, class_count=2, name="two_moons", feature_names=["x0", "x1"])
    logger.debug(f"[DATA] Generated two moons: N={n_nodes}, class counts={dataset.class_counts.tolist()}")
    return dataset


# =========================================================
# 🏘️ Planted Communities
# =========================================================
def make_community_dataset(
    n_nodes: int = 120,
    n_features: int = 8,
    minority_fraction: float = 0.5,
    p_in: float = 0.3,
    p_out: float = 0.01,
    seed: int = 0,
) -> Tuple[TabularDataset, GraphData]:
    """
    Two label-aligned blocks: an edge appears with probability p_in inside a
    block and p_out across blocks. Features are i.i.d. standard normal.
    """
    if not 0 <= p_out <= p_in <= 1:
        raise ParameterError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    n_majority, n_minority = _minority_counts(n_nodes, minority_fraction)

    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.zeros(n_majority, dtype=np.int64), np.ones(n_minority, dtype=np.int64)])
    labels = rng.permutation(labels)
    features = rng.standard_normal((n_nodes, n_features))

    same_block = labels[:, None] == labels[None, :]
    probability = np.where(same_block, p_in, p_out)
    draws = rng.random((n_nodes, n_nodes)) < probability
    upper = np.triu(draws, k=1)
    adjacency = sp.csr_matrix((upper | upper.T).astype(np.float64))

    dataset = TabularDataset(
        features=features,
        labels=labels,
        class_count=2,
        name="communities",
        feature_names=[f"noise{j}" for j in range(n_features)],
    )
    graph = GraphData.from_adjacency(adjacency)
    logger.debug(f"[DATA] Generated communities: N={n_nodes}, edges={graph.n_edges}")
    return dataset, graph
