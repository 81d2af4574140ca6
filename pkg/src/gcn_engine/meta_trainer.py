"""
Meta-Weighted Training
----------------------
Online per-example loss re-weighting for a GCN, plus the uniform and
class-weighted baselines.

One meta step at θ_t (γ = 0, so the look-ahead θ̂ equals θ_t):
    (a) lᵢ(θ_t) on the training nodes
    (b) θ̂(γ) = θ_t − α ∇θ Σᵢ γᵢ lᵢ
    (c) gᵢ = ∂L^meta(θ̂(γ))/∂γᵢ |γ=0 = −α ⟨∇θ lᵢ(θ_t), ∇θ L^meta(θ_t)⟩
    (d) w̃ᵢ = max(0, −η gᵢ)
    (e) wᵢ = w̃ᵢ / (Σⱼ w̃ⱼ + δ(Σⱼ w̃ⱼ)),   δ(z) = 1 iff z = 0
    (f) θ_{t+1} from θ_t with upstream Σᵢ wᵢ ∇lᵢ through the configured optimizer

Step (c) is evaluated either by one forward-mode pass (`jvp`, default): the
directional derivative of the training logits along ∇θ L^meta, dotted row-wise
with ∂lᵢ/∂zᵢ; or by one backward pass per training node (`per_example`).
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.gcn_engine.constants import TRAINLOG_COLUMNS
from src.gcn_engine.exceptions import NumericError, ParameterError, ShapeError, UndefinedMetricError
from src.gcn_engine.graph import GraphData
from src.gcn_engine.linalg import DenseMatrix, SparseMatrix, elementwise, frobenius_dot_sets, row_sum
from src.gcn_engine.losses import PerExampleLoss, meta_loss, one_hot, per_example_ce, weighted_loss
from src.gcn_engine.metrics import compute_metrics, macro_f1, predict_labels
from src.gcn_engine.model import (
    ForwardCache,
    GcnParams,
    gcn_backward,
    gcn_forward,
    init_params,
    logits_jvp,
    mlp_backward,
    mlp_forward,
)
from src.gcn_engine.optimizers import build_optimizer
from src.models.training import (
    Architecture,
    EpochRecord,
    MetaGradientMethod,
    TrainerConfig,
    TrainingMode,
)
from src.utils.logger import logger


# =========================================================
# 🧩 State Containers
# =========================================================
@dataclass
class WeightState:
    """Per-training-node weights of one step; γ is always re-initialized to zero."""
    w: np.ndarray
    w_tilde: np.ndarray
    gamma: np.ndarray

    @classmethod
    def fresh(cls, n_train: int) -> "WeightState":
        zeros = np.zeros(n_train, dtype=np.float64)
        return cls(w=zeros.copy(), w_tilde=zeros.copy(), gamma=zeros)


@dataclass
class MetaStepResult:
    params: GcnParams
    weights: WeightState
    meta_gradient: np.ndarray
    train_loss: float
    meta_loss: float


@dataclass
class TrainLog:
    """One EpochRecord per epoch."""
    records: List[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for r in self.records:
            v = r.validation
            rows.append({
                "epoch": r.epoch,
                "train_loss": r.train_loss,
                "meta_loss": np.nan if r.meta_loss is None else r.meta_loss,
                "val_accuracy": np.nan if v is None else v.accuracy,
                "val_macro_f1": np.nan if v is None else v.macro_f1,
                "val_auc": np.nan if v is None else v.auc_roc,
                "w_min": r.w_min,
                "w_mean": r.w_mean,
                "w_max": r.w_max,
            })
        return pd.DataFrame(rows, columns=TRAINLOG_COLUMNS)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
        return path


@dataclass
class TrainResult:
    params: GcnParams           # best-validation-macro-F1 parameters
    log: TrainLog
    best_epoch: int
    final_params: GcnParams


# =========================================================
# 🔧 Architecture Dispatch
# =========================================================
def _a_hat(graph: Optional[GraphData], cfg: TrainerConfig) -> Optional[SparseMatrix]:
    if Architecture(cfg.architecture) is Architecture.MLP:
        return None
    if graph is None:
        raise ParameterError("GCN training needs a graph")
    return graph.a_hat


def _forward(params: GcnParams, a_hat: Optional[SparseMatrix], x, cfg: TrainerConfig) -> ForwardCache:
    if a_hat is None:
        return mlp_forward(params, x, cfg.activation, cfg.output)
    return gcn_forward(params, a_hat, x, cfg.activation, cfg.output)


def _backward(cache: ForwardCache, params: GcnParams, a_hat: Optional[SparseMatrix], upstream) -> List[DenseMatrix]:
    if a_hat is None:
        return mlp_backward(cache, params, upstream)
    return gcn_backward(cache, params, a_hat, upstream)


def _check_train_indices(train_idx: np.ndarray, n_nodes: int) -> np.ndarray:
    idx = np.asarray(train_idx, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ParameterError("training index set is empty")
    if idx.min() < 0 or idx.max() >= n_nodes:
        raise ShapeError(f"training index outside [0, {n_nodes})")
    if np.unique(idx).size != idx.size:
        raise ParameterError("training indices must be unique")
    return idx


def _scatter(rows: DenseMatrix, idx: np.ndarray, n_nodes: int) -> DenseMatrix:
    """N×C upstream gradient that is `rows` at `idx` and zero elsewhere."""
    upstream = np.zeros((n_nodes, rows.shape[1]), dtype=np.float64)
    upstream[idx] = rows
    return upstream


def _require_finite(value, what: str) -> None:
    if not np.all(np.isfinite(value)):
        bad = np.flatnonzero(~np.isfinite(np.ravel(value)))
        raise NumericError(f"non-finite {what} (first offending entries: {bad[:5].tolist()})")


# =========================================================
# 📉 Losses at θ
# =========================================================
def _train_losses(params, a_hat, x, y, idx, cfg) -> Tuple[ForwardCache, PerExampleLoss]:
    cache = _forward(params, a_hat, x, cfg)
    return cache, per_example_ce(cache.probabilities[idx], y[idx], cfg.output)


def _meta_value_and_gradient(params: GcnParams, meta, n_classes: int, cfg: TrainerConfig):
    """Mean meta-set CE at θ and its parameter gradient."""
    if meta is None or len(meta) == 0:
        raise ParameterError("meta set is empty")
    a_hat = _a_hat(meta.graph, cfg)
    cache = _forward(params, a_hat, meta.features, cfg)
    ce = per_example_ce(cache.probabilities, one_hot(meta.labels, n_classes), cfg.output)
    value, upstream = weighted_loss(ce, np.full(len(ce), 1.0 / len(ce)))
    return value, _backward(cache, params, a_hat, upstream)


def evaluate_meta_loss(params: GcnParams, meta, n_classes: int, cfg: TrainerConfig) -> float:
    a_hat = _a_hat(meta.graph, cfg)
    cache = _forward(params, a_hat, meta.features, cfg)
    return meta_loss(cache.probabilities, one_hot(meta.labels, n_classes), cfg.output)


# =========================================================
# 🔬 Per-Example Gradients
# =========================================================
def _per_example_from_cache(cache, ce, params, a_hat, idx) -> List[List[DenseMatrix]]:
    grads = []
    for k, i in enumerate(idx):
        upstream = np.zeros_like(cache.logits)
        upstream[i] = ce.residuals[k]
        grads.append(_backward(cache, params, a_hat, upstream))
    return grads


def per_example_param_gradients(
    params: GcnParams,
    graph: Optional[GraphData],
    x,
    y,
    train_idx: Sequence[int],
    cfg: TrainerConfig,
) -> List[List[DenseMatrix]]:
    """∇θ lᵢ for every training node i, one backward pass each (upstream nonzero only at row i)."""
    a_hat = _a_hat(graph, cfg)
    idx = _check_train_indices(train_idx, np.shape(x)[0])
    cache, ce = _train_losses(params, a_hat, x, y, idx, cfg)
    return _per_example_from_cache(cache, ce, params, a_hat, idx)


# =========================================================
# 🎯 Meta-Gradient
# =========================================================
def _meta_gradient_from(cache, ce, params, a_hat, idx, meta_grads, cfg) -> np.ndarray:
    if MetaGradientMethod(cfg.meta_gradient) is MetaGradientMethod.JVP:
        d_logits = logits_jvp(cache, params, a_hat, meta_grads)[idx]
        inner = row_sum(elementwise(ce.residuals, d_logits, "hadamard"))
    else:
        per_example = _per_example_from_cache(cache, ce, params, a_hat, idx)
        inner = np.array([frobenius_dot_sets(g_i, meta_grads) for g_i in per_example])
    g = -cfg.alpha * inner
    _require_finite(g, "meta-gradient")
    return g


def meta_gradient(
    params: GcnParams,
    graph: Optional[GraphData],
    x,
    y,
    train_idx: Sequence[int],
    meta,
    cfg: TrainerConfig,
) -> np.ndarray:
    """gᵢ = −α⟨∇θ lᵢ, ∇θ L^meta⟩ at θ, one entry per training node."""
    a_hat = _a_hat(graph, cfg)
    idx = _check_train_indices(train_idx, np.shape(x)[0])
    _, meta_grads = _meta_value_and_gradient(params, meta, y.shape[1], cfg)
    cache, ce = _train_losses(params, a_hat, x, y, idx, cfg)
    return _meta_gradient_from(cache, ce, params, a_hat, idx, meta_grads, cfg)


def perturbed_meta_loss(
    params: GcnParams,
    graph: Optional[GraphData],
    x,
    y,
    train_idx: Sequence[int],
    meta,
    cfg: TrainerConfig,
    gamma,
) -> float:
    """
    Meta loss after the look-ahead step θ̂(γ) = θ − α∇θ Σᵢ γᵢ lᵢ(θ).

    γ may be negative here; this is the reference the meta-gradient is checked against.
    """
    a_hat = _a_hat(graph, cfg)
    idx = _check_train_indices(train_idx, np.shape(x)[0])
    cache, ce = _train_losses(params, a_hat, x, y, idx, cfg)
    upstream = _scatter(ce.grad_logits(gamma), idx, cache.logits.shape[0])
    theta_hat = params.axpy(_backward(cache, params, a_hat, upstream), -cfg.alpha)
    return evaluate_meta_loss(theta_hat, meta, y.shape[1], cfg)


# =========================================================
# ⚖️ Weights
# =========================================================
def propose_weights(g, eta: float) -> np.ndarray:
    """w̃ᵢ = max(0, −η gᵢ)."""
    return np.maximum(0.0, -eta * np.asarray(g, dtype=np.float64))


def normalize_weights(w_tilde) -> np.ndarray:
    """w̃ / (Σw̃ + δ(Σw̃)); all-zero proposals stay all zero."""
    w_tilde = np.asarray(w_tilde, dtype=np.float64)
    total = float(w_tilde.sum())
    return w_tilde / (total + (1.0 if total == 0.0 else 0.0))


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def class_balanced_weights(labels, n_classes: int) -> np.ndarray:
    """wᵢ = 1 / (#classes present · count[yᵢ]); sums to 1, equals 1/N when classes are balanced."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    counts = np.bincount(labels, minlength=n_classes)
    n_present = int(np.count_nonzero(counts))
    return 1.0 / (n_present * counts[labels]).astype(np.float64)


# =========================================================
# 🔁 One Meta Step
# =========================================================
def meta_weight_step(
    params: GcnParams,
    graph: Optional[GraphData],
    x,
    y,
    train_idx: Sequence[int],
    meta,
    cfg: TrainerConfig,
    optimizer=None,
) -> MetaStepResult:
    """
    Re-weight the training nodes from the meta-gradient and take one weighted step.

    Args:
        params: θ_t.
        graph: full graph (ignored for the MLP architecture).
        x: N×F features.
        y: N×C one-hot labels (only training rows are read).
        train_idx: training node indices.
        meta: MetaSet (features, labels, induced graph).
        cfg: trainer configuration.
        optimizer: stateful optimizer for step (f); SGD/Adam from cfg when omitted.
    """
    if meta is None or len(meta) == 0:
        raise ParameterError("meta set is empty")
    optimizer = optimizer or build_optimizer(cfg)
    a_hat = _a_hat(graph, cfg)
    idx = _check_train_indices(train_idx, np.shape(x)[0])

    cache, ce = _train_losses(params, a_hat, x, y, idx, cfg)
    meta_value, meta_grads = _meta_value_and_gradient(params, meta, y.shape[1], cfg)
    _require_finite([meta_value], "meta loss")
    for l, grad in enumerate(meta_grads):
        _require_finite(grad, f"meta-loss gradient of layer {l + 1}")

    state = WeightState.fresh(idx.size)
    g = _meta_gradient_from(cache, ce, params, a_hat, idx, meta_grads, cfg)
    state.w_tilde = propose_weights(g, cfg.eta)
    state.w = normalize_weights(state.w_tilde)
    if state.w.any():
        _, weighted_rows = weighted_loss(ce, state.w)
        grads = _backward(cache, params, a_hat, _scatter(weighted_rows, idx, cache.logits.shape[0]))
        new_params = optimizer.step(params, grads)
    else:
        # w = 0: θ stays put, optimizer moments are not advanced
        logger.debug("[META] No training node lowers the meta loss; parameters unchanged")
        new_params = params.copy()

    return MetaStepResult(
        params=new_params,
        weights=state,
        meta_gradient=g,
        train_loss=float(ce.losses.mean()),
        meta_loss=meta_value,
    )


# =========================================================
# 🏋️ Training Loop
# =========================================================
def _validation_metrics(probs: DenseMatrix, labels: np.ndarray, n_classes: int):
    """(report or None, macro-F1 used for checkpoint selection)."""
    selection = macro_f1(labels, predict_labels(probs), n_classes)
    try:
        return compute_metrics(probs, labels, n_classes=n_classes), selection
    except UndefinedMetricError:
        return None, selection


def _weight_summary(w: np.ndarray, train_labels: np.ndarray, n_classes: int) -> dict:
    per_class = {
        c: float(w[train_labels == c].mean()) for c in range(n_classes) if np.any(train_labels == c)
    }
    return {
        "w_min": float(w.min()),
        "w_mean": float(w.mean()),
        "w_max": float(w.max()),
        "class_mean_weights": per_class,
    }


def train(
    dataset,
    graph: Optional[GraphData],
    splits,
    meta_set,
    cfg: TrainerConfig,
    train_indices: Optional[Sequence[int]] = None,
) -> TrainResult:
    """
    Full-batch training for cfg.epochs epochs.

    Args:
        dataset: TabularDataset (standardized).
        graph: graph over all dataset nodes (unused for the MLP architecture).
        splits: SplitAssignment; `val` drives checkpoint selection.
        meta_set: MetaSet, required in meta mode.
        cfg: TrainerConfig.
        train_indices: overrides splits.train (SMOTE appends synthetic nodes).

    Returns:
        TrainResult with the parameters of the best validation macro-F1 epoch
        (earliest on ties) and one log record per epoch.
    """
    mode = TrainingMode(cfg.mode)
    if mode is TrainingMode.META and (meta_set is None or len(meta_set) == 0):
        raise ParameterError("meta mode needs a non-empty meta set")

    n_classes = dataset.class_count
    x = dataset.features
    y = one_hot(dataset.labels, n_classes)
    a_hat = _a_hat(graph, cfg)
    idx = _check_train_indices(splits.train if train_indices is None else train_indices, dataset.n_nodes)
    val_idx = np.asarray(splits.val, dtype=np.int64)
    train_labels = dataset.labels[idx]

    params = init_params(cfg.widths(dataset.n_features, n_classes), cfg.seed)
    optimizer = build_optimizer(cfg)
    if mode is TrainingMode.PLAIN:
        fixed_w = uniform_weights(idx.size)
    elif mode is TrainingMode.CLASS_WEIGHTED:
        fixed_w = class_balanced_weights(train_labels, n_classes)
    else:
        fixed_w = None

    logger.info(
        f"[TRAIN] {dataset.name}: mode={mode.value}, arch={Architecture(cfg.architecture).value}, "
        f"epochs={cfg.epochs}, optimizer={cfg.optimizer.value}, N_train={idx.size}"
    )

    log = TrainLog()
    best_params, best_epoch, best_f1 = params.copy(), 0, -np.inf
    for epoch in range(1, cfg.epochs + 1):
        if fixed_w is None:
            step = meta_weight_step(params, graph, x, y, idx, meta_set, cfg, optimizer)
            params, w = step.params, step.weights.w
            train_loss, meta_value = step.train_loss, step.meta_loss
        else:
            cache, ce = _train_losses(params, a_hat, x, y, idx, cfg)
            train_loss = float(ce.losses.mean())
            meta_value = None
            if meta_set is not None and len(meta_set):
                meta_value = evaluate_meta_loss(params, meta_set, n_classes, cfg)
            _, weighted_rows = weighted_loss(ce, fixed_w)
            grads = _backward(cache, params, a_hat, _scatter(weighted_rows, idx, dataset.n_nodes))
            params = optimizer.step(params, grads)
            w = fixed_w
        _require_finite([train_loss], f"training loss at epoch {epoch}")

        probs = _forward(params, a_hat, x, cfg).probabilities
        report, selection = _validation_metrics(probs[val_idx], dataset.labels[val_idx], n_classes)
        log.append(EpochRecord(
            epoch=epoch,
            train_loss=train_loss,
            meta_loss=meta_value,
            validation=report,
            **_weight_summary(w, train_labels, n_classes),
        ))
        if selection > best_f1:
            best_params, best_epoch, best_f1 = params.copy(), epoch, selection

        logger.debug(
            f"[TRAIN] epoch {epoch}: loss={train_loss:.5f}, val_macro_f1={selection:.4f}, "
            f"w=[{w.min():.4g}, {w.max():.4g}]"
        )

    logger.info(f"[TRAIN] Done: best val macro-F1 {best_f1:.4f} at epoch {best_epoch}")
    return TrainResult(params=best_params, log=log, best_epoch=best_epoch, final_params=params)


def predict_probabilities(params: GcnParams, graph: Optional[GraphData], x, cfg: TrainerConfig) -> DenseMatrix:
    """Class probabilities of every node under the trained parameters."""
    return _forward(params, _a_hat(graph, cfg), x, cfg).probabilities
