"""
Training Models
---------------
Schemas for the trainer: hyperparameters, evaluation reports and per-epoch
log records.

✅ Pydantic v2 (`Field`, `ConfigDict`, validators)
✅ Enum-typed switches so INI strings validate directly
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.gcn_engine.constants import DEFAULT_ALPHA, DEFAULT_EPOCHS, DEFAULT_ETA, DEFAULT_HIDDEN
from src.gcn_engine.model import Activation, OutputKind


# =========================================================
# 🧩 ENUMS
# =========================================================
class TrainingMode(str, Enum):
    """How per-example weights are chosen each epoch."""
    META = "meta"
    PLAIN = "plain"
    CLASS_WEIGHTED = "class_weighted"


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


class Architecture(str, Enum):
    GCN = "gcn"
    MLP = "mlp"


class MetaGradientMethod(str, Enum):
    """Evaluation path for the meta-gradient; both are exact."""
    JVP = "jvp"
    PER_EXAMPLE = "per_example"


# =========================================================
# ⚙️ TRAINER CONFIG
# =========================================================
class TrainerConfig(BaseModel):
    """Hyperparameters of one training run."""
    alpha: float = Field(DEFAULT_ALPHA, gt=0, description="Inner learning rate α")
    eta: float = Field(DEFAULT_ETA, gt=0, description="Meta-learning rate η")
    epochs: int = Field(DEFAULT_EPOCHS, ge=1, description="Full-batch epochs")
    seed: int = Field(0, description="Seed for parameter initialization")
    optimizer: OptimizerKind = Field(OptimizerKind.SGD, description="Optimizer applying the weighted update")
    beta1: float = Field(0.9, ge=0, lt=1, description="Adam first-moment decay")
    beta2: float = Field(0.999, ge=0, lt=1, description="Adam second-moment decay")
    adam_eps: float = Field(1e-8, gt=0, description="Adam denominator epsilon")
    mode: TrainingMode = Field(TrainingMode.META, description="meta | plain | class_weighted")
    architecture: Architecture = Field(Architecture.GCN, description="gcn propagates over Â, mlp does not")
    hidden: List[int] = Field(default_factory=lambda: list(DEFAULT_HIDDEN), description="Hidden layer widths")
    activation: Activation = Field(Activation.RELU, description="Hidden-layer activation")
    output: OutputKind = Field(OutputKind.SIGMOID, description="Output nonlinearity")
    meta_gradient: MetaGradientMethod = Field(MetaGradientMethod.JVP, description="Meta-gradient evaluation path")

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    @field_validator("hidden", mode="before")
    @classmethod
    def parse_hidden(cls, value):
        """Accept '32' or '32,16' from config files as well as lists."""
        if isinstance(value, str):
            value = [part for part in value.replace(" ", "").split(",") if part]
        if isinstance(value, int):
            value = [value]
        return value

    @field_validator("hidden")
    @classmethod
    def check_hidden(cls, value: List[int]) -> List[int]:
        if any(width < 1 for width in value):
            raise ValueError("hidden widths must be positive")
        return value

    def widths(self, n_features: int, n_classes: int) -> List[int]:
        return [n_features, *self.hidden, n_classes]


# =========================================================
# 📊 METRIC REPORT
# =========================================================
class MetricReport(BaseModel):
    """Accuracy, macro-F1 and AUC-ROC of one evaluation."""
    accuracy: float = Field(..., ge=0.0, le=1.0, description="Fraction of correct predictions")
    macro_f1: float = Field(..., ge=0.0, le=1.0, description="Unweighted mean of per-class F1")
    auc_roc: float = Field(..., ge=0.0, le=1.0, description="Mann-Whitney AUC of the positive-class score")

    model_config = ConfigDict(extra="forbid", frozen=True)


# =========================================================
# 📝 EPOCH RECORD
# =========================================================
class EpochRecord(BaseModel):
    """One TrainLog line."""
    epoch: int = Field(..., ge=1)
    train_loss: float = Field(..., description="Unweighted mean training CE at θ_t")
    meta_loss: Optional[float] = Field(None, description="Mean meta-set CE at θ_t (None without a meta set)")
    validation: Optional[MetricReport] = Field(None, description="Validation metrics after the update")
    w_min: float
    w_mean: float
    w_max: float
    class_mean_weights: Dict[int, float] = Field(default_factory=dict, description="Mean weight per class")

    model_config = ConfigDict(extra="ignore")

    @model_validator(mode="after")
    def check_weight_summary(self):
        if self.w_min < 0:
            raise ValueError("weights must be non-negative")
        return self
