"""
Tabular Datasets
----------------
- Loads the UCI Haberman survival file, the Pima Indians diabetes file or a
  generic CSV (last column = label) into a TabularDataset.
- Validates every row and reports malformed ones by file row number.
- Standardizes features with statistics from the training rows only.

Usage:
    d = load_dataset("data/haberman.data", "haberman")
    d = standardize(d, splits.train)
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from src.gcn_engine.exceptions import DataError, ParameterError
from src.utils.logger import logger


class DatasetSchema(str, Enum):
    HABERMAN = "haberman"
    PIMA_DIABETES = "pima_diabetes"
    GENERIC_CSV = "generic_csv"


# 🧩 Expected column counts (features + label); None = any width ≥ 2
SCHEMA_COLUMNS = {
    DatasetSchema.HABERMAN: 4,
    DatasetSchema.PIMA_DIABETES: 9,
    DatasetSchema.GENERIC_CSV: None,
}

HABERMAN_FEATURES = ["age", "operation_year", "positive_nodes"]
PIMA_FEATURES = [
    "pregnancies", "glucose", "blood_pressure", "skin_thickness",
    "insulin", "bmi", "diabetes_pedigree", "age",
]


# =========================================================
# 📦 Dataset Container
# =========================================================
@dataclass(frozen=True)
class TabularDataset:
    """Node features 𝒳 (N×F) and integer labels 𝒴 in 0..C−1."""
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    name: str
    feature_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if features.ndim != 2:
            raise DataError(f"{self.name}: features must be 2-D, got {features.shape}")
        if features.shape[0] != labels.shape[0]:
            raise DataError(f"{self.name}: {features.shape[0]} feature rows for {labels.shape[0]} labels")
        if not np.all(np.isfinite(features)):
            raise DataError(f"{self.name}: features contain missing or non-finite values")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise DataError(f"{self.name}: labels outside [0, {self.class_count})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_nodes(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    @property
    def imbalance_ratio(self) -> float:
        """Majority count over minority count."""
        counts = self.class_counts
        return float(counts.max() / counts.min()) if counts.min() > 0 else float("inf")

    def with_features(self, features: np.ndarray) -> "TabularDataset":
        return replace(self, features=features)


# =========================================================
# 🔧 Parsing Helpers
# =========================================================
def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except (TypeError, ValueError):
        return False


def _read_rows(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            skipinitialspace=True,
            skip_blank_lines=True,
            keep_default_na=False,
        )
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"{path}: file is empty") from exc
    except pd.errors.ParserError as exc:
        raise DataError(f"{path}: malformed row ({exc})") from exc
    return frame.apply(lambda col: col.str.strip())


def _split_header(frame: pd.DataFrame) -> tuple[pd.DataFrame, Optional[List[str]], int]:
    """Drop a non-numeric first row; return (rows, header, file row number of the first data row)."""
    first = frame.iloc[0].tolist()
    if not all(_is_number(value) for value in first[:-1]):
        return frame.iloc[1:].reset_index(drop=True), [str(v) for v in first], 2
    return frame, None, 1


def _parse_features(frame: pd.DataFrame, first_row: int, path: Path) -> np.ndarray:
    raw = frame.iloc[:, :-1]
    numeric = raw.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1) | (raw == "").any(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        values = ",".join(frame.iloc[row].tolist())
        raise DataError(f"{path}: row {row + first_row} has an unparseable or missing field: '{values}'")
    return numeric.to_numpy(dtype=np.float64)


def _parse_coded_labels(column: pd.Series, mapping: dict, first_row: int, path: Path) -> np.ndarray:
    numeric = pd.to_numeric(column, errors="coerce")
    labels = numeric.map(lambda v: mapping.get(v) if pd.notna(v) else None)
    bad = labels.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(
            f"{path}: row {row + first_row} has label '{column.iloc[row]}', expected one of {sorted(mapping)}"
        )
    return labels.to_numpy(dtype=np.int64)


def _parse_generic_labels(column: pd.Series, first_row: int, path: Path) -> np.ndarray:
    empty = column == ""
    if empty.any():
        row = int(np.flatnonzero(empty.to_numpy())[0])
        raise DataError(f"{path}: row {row + first_row} has an empty label")

    numeric = pd.to_numeric(column, errors="coerce")
    keys = numeric if numeric.notna().all() else column
    classes = np.sort(keys.unique())
    labels = np.searchsorted(classes, keys.to_numpy())

    # binary data: class 1 is the minority
    if classes.size == 2:
        counts = np.bincount(labels, minlength=2)
        if counts[1] > counts[0]:
            labels = 1 - labels
    return labels.astype(np.int64)


# =========================================================
# 📥 Loading
# =========================================================
def load_dataset(path: str | Path, schema: DatasetSchema | str, name: Optional[str] = None) -> TabularDataset:
    """
    Read a comma-separated dataset file.

    Args:
        path: file location.
        schema: "haberman" (label 2 → class 1), "pima_diabetes" (0/1 label)
                or "generic_csv" (last column label, class 1 = minority).
        name: dataset identifier (defaults to the file stem).

    Raises:
        DataError: missing file, malformed row, wrong width, single-class data.
    """
    path = Path(path)
    try:
        schema = DatasetSchema(schema)
    except ValueError as exc:
        raise ParameterError(f"unknown dataset schema '{schema}'") from exc
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")

    frame = _read_rows(path)
    if frame.empty:
        raise DataError(f"{path}: no rows")

    expected = SCHEMA_COLUMNS[schema]
    if expected is not None and frame.shape[1] != expected:
        raise DataError(f"{path}: expected {expected} columns for {schema.value}, found {frame.shape[1]}")
    if frame.shape[1] < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")

    frame, header, first_row = _split_header(frame)
    if frame.empty:
        raise DataError(f"{path}: header only, no data rows")

    features = _parse_features(frame, first_row, path)
    label_column = frame.iloc[:, -1]
    if schema is DatasetSchema.HABERMAN:
        labels = _parse_coded_labels(label_column, {1.0: 0, 2.0: 1}, first_row, path)
        feature_names = HABERMAN_FEATURES
    elif schema is DatasetSchema.PIMA_DIABETES:
        labels = _parse_coded_labels(label_column, {0.0: 0, 1.0: 1}, first_row, path)
        feature_names = PIMA_FEATURES
    else:
        labels = _parse_generic_labels(label_column, first_row, path)
        feature_names = header[:-1] if header else [f"x{j}" for j in range(features.shape[1])]

    class_count = int(labels.max()) + 1
    if np.unique(labels).size < 2:
        raise DataError(f"{path}: only one class present")

    dataset = TabularDataset(
        features=features,
        labels=labels,
        class_count=class_count,
        name=name or path.stem,
        feature_names=list(feature_names),
    )
    logger.info(
        f"[DATA] Loaded {dataset.name}: N={dataset.n_nodes}, F={dataset.n_features}, "
        f"C={dataset.class_count}, class counts={dataset.class_counts.tolist()}"
    )
    return dataset


# =========================================================
# 📏 Standardization
# =========================================================
def standardize(d: TabularDataset, fit_indices: Sequence[int]) -> TabularDataset:
    """Z-score every column with mean/std of `fit_indices` rows; zero-std columns become 0."""
    idx = np.asarray(fit_indices, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ParameterError("standardize needs at least one fit row")

    scaler = StandardScaler().fit(d.features[idx])
    scaled = scaler.transform(d.features)
    constant = scaler.var_ == 0.0
    scaled[:, constant] = 0.0
    if constant.any():
        logger.debug(f"[DATA] {int(constant.sum())} constant column(s) mapped to 0")
    return d.with_features(scaled)
