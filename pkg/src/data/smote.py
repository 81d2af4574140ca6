"""
SMOTE Oversampling
------------------
Synthetic minority rows for the SMOTE + GCN baseline.

- Interpolates each synthetic row between a training minority row and one of
  its k nearest minority neighbours (imbalanced-learn `SMOTE`).
- Generates enough rows to bring the minority count to round(scale × majority)
  in the training split, never removing anything.
- Appends the synthetic rows as new nodes linked by the k-NN rule to the real nodes.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from imblearn.over_sampling import SMOTE

from src.data.datasets import TabularDataset
from src.gcn_engine.constants import DEFAULT_KNN_K, DEFAULT_KNN_METRIC, DEFAULT_SMOTE_K, DEFAULT_SMOTE_SCALE
from src.gcn_engine.exceptions import ParameterError
from src.gcn_engine.graph import DistanceMetric, GraphData, attach_nodes
from src.utils.logger import logger


@dataclass(frozen=True)
class SmoteResult:
    """Augmented dataset; synthetic nodes occupy indices N..N+S-1."""
    dataset: TabularDataset
    train_indices: np.ndarray
    graph: Optional[GraphData]
    n_synthetic: int


def smote_target(n_minority: int, n_majority: int, scale: float) -> int:
    """Minority count after oversampling (never below the current count)."""
    return max(n_minority, int(round(scale * n_majority)))


def smote_oversample(
    d: TabularDataset,
    train_indices: Sequence[int],
    scale: float = DEFAULT_SMOTE_SCALE,
    k: int = DEFAULT_SMOTE_K,
    seed: int = 0,
    graph: Optional[GraphData] = None,
    graph_k: int = DEFAULT_KNN_K,
    metric: DistanceMetric | str = DEFAULT_KNN_METRIC,
) -> SmoteResult:
    """
    Oversample the minority class of the training rows.

    Args:
        d: dataset (standardized features).
        train_indices: training rows; only these feed SMOTE.
        scale: target minority:majority ratio.
        k: minority neighbours considered for interpolation.
        seed: sampling seed.
        graph: graph over d's nodes; synthetic nodes are attached to it when given.
        graph_k, metric: k-NN rule used for attaching.
    """
    if d.class_count != 2:
        raise ParameterError(f"SMOTE baseline supports two classes, got {d.class_count}")
    if scale <= 0:
        raise ParameterError(f"scale must be positive, got {scale}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")

    train_idx = np.asarray(train_indices, dtype=np.int64).ravel()
    x_train, y_train = d.features[train_idx], d.labels[train_idx]
    counts = np.bincount(y_train, minlength=2)
    minority = int(np.argmin(counts))
    n_minority, n_majority = int(counts[minority]), int(counts[1 - minority])
    if n_minority < 2:
        raise ParameterError(f"SMOTE needs at least 2 minority training examples, got {n_minority}")

    target = smote_target(n_minority, n_majority, scale)
    n_synthetic = target - n_minority
    if n_synthetic == 0:
        logger.info(f"[SMOTE] Target {target} does not exceed minority count {n_minority}; nothing generated.")
        return SmoteResult(dataset=d, train_indices=train_idx, graph=graph, n_synthetic=0)

    sampler = SMOTE(
        sampling_strategy={minority: target},
        k_neighbors=min(k, n_minority - 1),
        random_state=seed,
    )
    x_resampled, _ = sampler.fit_resample(x_train, y_train)
    synthetic = x_resampled[train_idx.size:]

    augmented = TabularDataset(
        features=np.vstack([d.features, synthetic]),
        labels=np.concatenate([d.labels, np.full(n_synthetic, minority, dtype=np.int64)]),
        class_count=d.class_count,
        name=d.name,
        feature_names=d.feature_names,
    )
    new_train = np.concatenate([train_idx, np.arange(d.n_nodes, d.n_nodes + n_synthetic)])
    new_graph = attach_nodes(graph, d.features, synthetic, graph_k, metric) if graph is not None else None

    logger.info(
        f"[SMOTE] Generated {n_synthetic} synthetic rows: minority {n_minority} → {target}, majority {n_majority}"
    )
    return SmoteResult(dataset=augmented, train_indices=new_train, graph=new_graph, n_synthetic=n_synthetic)
