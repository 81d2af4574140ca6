"""
Experiment Models
-----------------
Schemas for the multi-seed harness: the experiment configuration (one model
per INI section), per-cell results and the aggregated comparison table.

✅ Pydantic v2
✅ JSON round-trip via `model_dump_json` / `model_validate_json`
"""

from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator

from src.data.datasets import DatasetSchema
from src.gcn_engine.constants import (
    DEFAULT_KNN_K,
    DEFAULT_SMOTE_K,
    DEFAULT_SMOTE_SCALE,
    METHOD_LABELS,
    METHODS,
)
from src.gcn_engine.graph import DistanceMetric
from src.models.training import MetricReport, TrainerConfig


def _none_if_blank(value):
    if isinstance(value, str) and value.strip().lower() in ("", "none", "null"):
        return None
    return value


def _split_list(value):
    value = _none_if_blank(value)
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


# INI values arrive as strings: blank → None, "a, b" → ["a", "b"]
OptionalStr = Annotated[Optional[str], BeforeValidator(_none_if_blank)]
OptionalInt = Annotated[Optional[int], BeforeValidator(_none_if_blank)]
GeneratorName = Annotated[Optional[Literal["two_moons", "community"]], BeforeValidator(_none_if_blank)]
StrList = Annotated[List[str], BeforeValidator(_split_list)]
OptionalIntList = Annotated[Optional[List[int]], BeforeValidator(_split_list)]


# =========================================================
# ⚙️ CONFIG SECTIONS
# =========================================================
class DatasetConfig(BaseModel):
    """[dataset]: a file on disk or a generated problem."""
    name: OptionalStr = Field(None, description="Identifier used in reports and output paths")
    path: OptionalStr = Field(None, description="Dataset file")
    schema_: DatasetSchema = Field(DatasetSchema.GENERIC_CSV, alias="schema", description="File schema")
    generator: GeneratorName = Field(None, description="Synthetic generator")
    n_nodes: int = Field(120, ge=10, description="Generated node count")
    n_features: int = Field(8, ge=1, description="Generated noise features (community)")
    minority_fraction: float = Field(0.5, gt=0, le=0.5, description="Generated minority share")
    noise: float = Field(0.1, ge=0, description="Two-moons noise")
    p_in: float = Field(0.3, ge=0, le=1, description="Community edge probability inside a block")
    p_out: float = Field(0.01, ge=0, le=1, description="Community edge probability across blocks")
    seed: int = Field(0, description="Generator seed")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def check_source(self):
        if (self.path is None) == (self.generator is None):
            raise ValueError("set exactly one of dataset.path and dataset.generator")
        return self

    @property
    def display_name(self) -> str:
        if self.name:
            return self.name
        if self.generator:
            return self.generator
        return self.path.replace("\\", "/").rsplit("/", 1)[-1].split(".")[0]


class GraphConfig(BaseModel):
    """[graph]: k-NN construction, or a fixed edge list."""
    k: int = Field(DEFAULT_KNN_K, ge=1, description="Neighbours per node")
    metric: DistanceMetric = Field(DistanceMetric.EUCLIDEAN, description="euclidean | cosine")
    edges: OptionalStr = Field(None, description="Edge-list file ('i j' per line) replacing k-NN")

    model_config = ConfigDict(extra="forbid")


class MetaConfig(BaseModel):
    """[meta]: meta-set sampling."""
    per_class: OptionalInt = Field(None, ge=1, description="Nodes per class (default: smallest pool class)")

    model_config = ConfigDict(extra="forbid")


class SmoteConfig(BaseModel):
    """[smote]: oversampling baseline."""
    scale: float = Field(DEFAULT_SMOTE_SCALE, gt=0, description="Target minority:majority ratio")
    k: int = Field(DEFAULT_SMOTE_K, ge=1, description="Minority neighbours for interpolation")

    model_config = ConfigDict(extra="forbid")


class RunConfig(BaseModel):
    """[experiment]: methods, seeds, outputs."""
    methods: StrList = Field(default_factory=lambda: list(METHODS), description="Methods to run")
    n_seeds: int = Field(10, ge=1, description="Seeds 0..n_seeds-1 unless `seeds` is given")
    seeds: OptionalIntList = Field(None, description="Explicit seed list")
    out: str = Field("runs", description="Output directory")
    n_jobs: int = Field(1, description="Parallel cells (joblib; -1 = all cores)")

    model_config = ConfigDict(extra="forbid")

    @field_validator("methods")
    @classmethod
    def check_methods(cls, value: List[str]) -> List[str]:
        unknown = [m for m in value if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
        if not value:
            raise ValueError("at least one method is required")
        return list(dict.fromkeys(value))

    @property
    def seed_list(self) -> List[int]:
        return list(self.seeds) if self.seeds else list(range(self.n_seeds))


class ExperimentConfig(BaseModel):
    """Full experiment configuration, one field per INI section."""
    dataset: DatasetConfig
    graph: GraphConfig = Field(default_factory=GraphConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    meta: MetaConfig = Field(default_factory=MetaConfig)
    smote: SmoteConfig = Field(default_factory=SmoteConfig)
    experiment: RunConfig = Field(default_factory=RunConfig)

    model_config = ConfigDict(extra="forbid")


# =========================================================
# 📊 RESULTS
# =========================================================
class CellStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"
    SKIPPED = "skipped"


class CellResult(BaseModel):
    """Outcome of one (dataset, method, seed) run, evaluated on the test split."""
    dataset: str
    method: str
    seed: int
    status: CellStatus
    metrics: Optional[MetricReport] = None
    best_epoch: Optional[int] = None
    error: Optional[str] = None

    model_config = ConfigDict(extra="ignore")


class MetricSummary(BaseModel):
    mean: float
    std: float


class MethodSummary(BaseModel):
    """One table row: mean ± population std over the successful seeds."""
    dataset: str
    method: str
    label: str
    status: CellStatus
    n_ok: int = 0
    n_failed: int = 0
    n_skipped: int = 0
    accuracy: Optional[MetricSummary] = None
    macro_f1: Optional[MetricSummary] = None
    auc_roc: Optional[MetricSummary] = None


def _method_rank(method: str) -> int:
    return METHODS.index(method) if method in METHODS else len(METHODS)


def _summarize(values: List[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=np.float64)
    return MetricSummary(mean=float(arr.mean()), std=float(arr.std(ddof=0)))


class ResultTable(BaseModel):
    """Per (dataset, method) summaries plus the cells they were built from."""
    rows: List[MethodSummary] = Field(default_factory=list)
    cells: List[CellResult] = Field(default_factory=list)

    @classmethod
    def from_cells(cls, cells: List[CellResult]) -> "ResultTable":
        """Group by (dataset, method) after sorting, so cell order never matters."""
        ordered = sorted(cells, key=lambda c: (c.dataset, _method_rank(c.method), c.method, c.seed))
        groups: Dict[tuple, List[CellResult]] = {}
        for cell in ordered:
            groups.setdefault((cell.dataset, cell.method), []).append(cell)

        rows = []
        for (dataset, method), group in groups.items():
            ok = [c for c in group if c.status is CellStatus.OK and c.metrics is not None]
            n_failed = sum(c.status is CellStatus.FAILED for c in group)
            n_skipped = sum(c.status is CellStatus.SKIPPED for c in group)
            if ok:
                status = CellStatus.OK
            elif n_failed:
                status = CellStatus.FAILED
            else:
                status = CellStatus.SKIPPED
            row = MethodSummary(
                dataset=dataset,
                method=method,
                label=METHOD_LABELS.get(method, method),
                status=status,
                n_ok=len(ok),
                n_failed=n_failed,
                n_skipped=n_skipped,
            )
            if ok:
                row.accuracy = _summarize([c.metrics.accuracy for c in ok])
                row.macro_f1 = _summarize([c.metrics.macro_f1 for c in ok])
                row.auc_roc = _summarize([c.metrics.auc_roc for c in ok])
            rows.append(row)
        return cls(rows=rows, cells=ordered)

    @property
    def datasets(self) -> List[str]:
        return list(dict.fromkeys(row.dataset for row in self.rows))

    @property
    def methods(self) -> List[str]:
        return sorted({row.method for row in self.rows}, key=lambda m: (_method_rank(m), m))

    def row(self, dataset: str, method: str) -> Optional[MethodSummary]:
        return next((r for r in self.rows if r.dataset == dataset and r.method == method), None)
