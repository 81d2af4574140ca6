"""
Meta Set Sampling
-----------------
Class-balanced node sample drawn from the held-out meta pool, uniformly and
without regard to the graph, plus its induced subgraph.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.data.datasets import TabularDataset
from src.data.splits import SplitAssignment
from src.gcn_engine.exceptions import ParameterError
from src.gcn_engine.graph import GraphData, induced_subgraph
from src.utils.logger import logger


@dataclass(frozen=True)
class MetaSet:
    node_indices: np.ndarray   # positions in the full graph, ascending
    features: np.ndarray       # M×F
    labels: np.ndarray         # M
    graph: GraphData           # induced on node_indices

    def __len__(self) -> int:
        return int(self.node_indices.size)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels)


def sample_meta_set(
    d: TabularDataset,
    splits: SplitAssignment,
    g: GraphData,
    per_class: Optional[int] = None,
    seed: int = 0,
) -> MetaSet:
    """
    Draw `per_class` pool nodes of every class (default: the smallest class
    count in the pool). Classes with fewer pool members contribute all of them.
    """
    pool = splits.meta_pool
    members = [pool[d.labels[pool] == c] for c in range(d.class_count)]
    empty = [c for c, m in enumerate(members) if m.size == 0]
    if empty:
        raise ParameterError(f"meta pool has no examples of class(es) {empty}")

    if per_class is None:
        per_class = min(m.size for m in members)
    if per_class < 1:
        raise ParameterError(f"per_class must be >= 1, got {per_class}")

    rng = np.random.default_rng(seed)
    chosen = []
    for c, candidates in enumerate(members):
        if candidates.size < per_class:
            logger.warning(
                f"[DATA] Meta pool holds only {candidates.size} of class {c} "
                f"(requested {per_class}); taking all of them."
            )
            chosen.append(candidates)
        else:
            chosen.append(rng.choice(candidates, size=per_class, replace=False))

    idx = np.sort(np.concatenate(chosen))
    meta = MetaSet(
        node_indices=idx,
        features=d.features[idx],
        labels=d.labels[idx],
        graph=induced_subgraph(g, idx),
    )
    logger.debug(f"[DATA] Meta set: M={len(meta)}, class counts={meta.class_counts.tolist()}")
    return meta
