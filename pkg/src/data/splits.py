"""
Train / Validation / Test / Meta Splits
---------------------------------------
Stratified 60/10/20/10 partition of the nodes and the plain-text split
manifest ("index split-name" per line) written next to every run.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict

import numpy as np
from sklearn.model_selection import train_test_split

from src.data.datasets import TabularDataset
from src.gcn_engine.constants import SPLIT_FRACTIONS, SPLIT_NAMES
from src.gcn_engine.exceptions import DataError, ParameterError
from src.utils.logger import logger


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint, exhaustive index sets (each sorted ascending)."""
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    meta_pool: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test", "meta_pool"):
            object.__setattr__(self, name, np.sort(np.asarray(getattr(self, name), dtype=np.int64).ravel()))
        combined = np.concatenate([self.train, self.val, self.test, self.meta_pool])
        if np.unique(combined).size != combined.size:
            raise ParameterError("split index sets overlap")

    @property
    def n_nodes(self) -> int:
        return self.train.size + self.val.size + self.test.size + self.meta_pool.size

    @property
    def sizes(self) -> Dict[str, int]:
        return {name: part.size for name, part in zip(SPLIT_NAMES, self.parts())}

    def parts(self):
        return self.train, self.val, self.test, self.meta_pool

    def assignment(self) -> np.ndarray:
        """Split name per node index."""
        combined = np.concatenate(self.parts())
        if combined.size and (combined.min() < 0 or combined.max() >= self.n_nodes):
            raise ParameterError("split index sets do not cover 0..N-1")
        names = np.empty(self.n_nodes, dtype=object)
        for name, part in zip(SPLIT_NAMES, self.parts()):
            names[part] = name
        return names


# =========================================================
# 🔀 Stratified Split
# =========================================================
def _split_sizes(n: int) -> tuple[int, int, int, int]:
    n_train, n_val, n_test = (int(round(f * n)) for f in SPLIT_FRACTIONS[:3])
    return n_train, n_val, n_test, n - n_train - n_val - n_test


def split(d: TabularDataset, seed: int) -> SplitAssignment:
    """
    Stratified shuffle-split into train / val / test / meta pool.

    Raises:
        ParameterError: N < 10·C, or some class cannot appear in every split.
    """
    n, n_classes = d.n_nodes, d.class_count
    if n < 10 * n_classes:
        raise ParameterError(f"need at least {10 * n_classes} nodes for {n_classes} classes, got {n}")

    n_train, n_val, n_test, n_meta = _split_sizes(n)
    indices = np.arange(n)
    labels = d.labels
    try:
        train, rest = train_test_split(
            indices, train_size=n_train, stratify=labels, random_state=seed
        )
        val, rest = train_test_split(
            rest, train_size=n_val, stratify=labels[rest], random_state=seed
        )
        test, meta_pool = train_test_split(
            rest, train_size=n_test, test_size=n_meta, stratify=labels[rest], random_state=seed
        )
    except ValueError as exc:
        raise ParameterError(f"cannot stratify {d.name} into 60/10/20/10: {exc}") from exc

    splits = SplitAssignment(train=train, val=val, test=test, meta_pool=meta_pool)
    for name, part in zip(SPLIT_NAMES, splits.parts()):
        missing = set(range(n_classes)) - set(np.unique(labels[part]).tolist())
        if missing:
            raise ParameterError(f"class(es) {sorted(missing)} missing from the {name} split of {d.name}")

    logger.debug(f"[DATA] Split {d.name} (seed={seed}): {splits.sizes}")
    return splits


# =========================================================
# 💾 Manifest
# =========================================================
def write_split_manifest(splits: SplitAssignment, path: str | Path) -> Path:
    """One line per node: '<index> <split-name>'."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = splits.assignment()
    path.write_text("".join(f"{i} {name}\n" for i, name in enumerate(names)), encoding="utf-8")
    return path


def read_split_manifest(path: str | Path) -> SplitAssignment:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"split manifest not found: {path}")

    members = {name: [] for name in SPLIT_NAMES}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 2 or not fields[0].isdigit() or fields[1] not in members:
            raise DataError(f"{path}: line {line_no} is not '<index> <split-name>': '{line}'")
        members[fields[1]].append(int(fields[0]))

    try:
        splits = SplitAssignment(*(members[name] for name in SPLIT_NAMES))
        splits.assignment()
    except ParameterError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return splits
