"""
Losses
------
Per-example cross-entropy lᵢ, the weighted objective Σᵢ wᵢ lᵢ and the mean
meta-set loss.

With sigmoid outputs lᵢ is the per-class binary cross-entropy
    lᵢ = −Σ_c [ yᵢc ln pᵢc + (1 − yᵢc) ln(1 − pᵢc) ]
and with softmax outputs the categorical one, lᵢ = −Σ_c yᵢc ln pᵢc.
In both cases ∂lᵢ/∂zᵢ = pᵢ − yᵢ, which is what `residuals` stores.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.gcn_engine.constants import PROB_CLAMP
from src.gcn_engine.exceptions import ContractViolation, ParameterError, ShapeError
from src.gcn_engine.linalg import DenseMatrix, as_dense
from src.gcn_engine.model import OutputKind


@dataclass(frozen=True)
class PerExampleLoss:
    """Losses of the evaluated nodes plus ∂lᵢ/∂zᵢ rows."""
    losses: np.ndarray        # (n,) ≥ 0
    residuals: DenseMatrix    # (n, C) = p − y

    def __len__(self) -> int:
        return self.losses.shape[0]

    def grad_logits(self, w) -> DenseMatrix:
        """Gradient of Σᵢ wᵢ lᵢ w.r.t. the evaluated logits: rows wᵢ(pᵢ − yᵢ)."""
        w = np.asarray(w, dtype=np.float64).ravel()
        if w.shape[0] != len(self):
            raise ShapeError(f"{w.shape[0]} weights for {len(self)} losses")
        return w[:, None] * self.residuals


# =========================================================
# 🏷️ Label Helpers
# =========================================================
def one_hot(labels, n_classes: int) -> DenseMatrix:
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ParameterError(f"labels must lie in [0, {n_classes})")
    encoded = np.zeros((labels.size, n_classes), dtype=np.float64)
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def _validate_one_hot(labels: DenseMatrix) -> None:
    is_binary = np.all((labels == 0.0) | (labels == 1.0))
    if not is_binary or not np.all(labels.sum(axis=1) == 1.0):
        bad = np.flatnonzero(~((labels == 0.0) | (labels == 1.0)).all(axis=1) | (labels.sum(axis=1) != 1.0))
        raise ContractViolation(f"label rows must be one-hot (offending rows: {bad[:5].tolist()})")


# =========================================================
# 📉 Per-Example Cross-Entropy
# =========================================================
def per_example_ce(
    probs,
    labels,
    output: OutputKind | str = OutputKind.SIGMOID,
) -> PerExampleLoss:
    """
    Per-node cross-entropy for the evaluated rows.

    Args:
        probs: (n, C) model probabilities (sigmoid or softmax outputs).
        labels: (n, C) one-hot targets.
        output: which output nonlinearity produced `probs`.
    """
    output = OutputKind(output)
    p = as_dense(probs, "probs")
    y = as_dense(labels, "labels")
    if p.shape != y.shape:
        raise ShapeError(f"probs {p.shape} and labels {y.shape} differ")
    _validate_one_hot(y)

    clamped = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    if output is OutputKind.SIGMOID:
        terms = y * np.log(clamped) + (1.0 - y) * np.log1p(-clamped)
    else:
        terms = y * np.log(clamped)
    losses = -terms.sum(axis=1)
    return PerExampleLoss(losses=np.maximum(losses, 0.0), residuals=p - y)


def weighted_loss(losses: PerExampleLoss, w) -> Tuple[float, DenseMatrix]:
    """Return (Σᵢ wᵢ lᵢ, ∂/∂logits) for non-negative weights."""
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != len(losses):
        raise ContractViolation(f"{w.shape[0]} weights for {len(losses)} losses")
    if np.any(w < 0):
        raise ContractViolation("example weights must be non-negative")
    return float(np.dot(w, losses.losses)), losses.grad_logits(w)


def meta_loss(
    probs_meta,
    labels_meta,
    output: OutputKind | str = OutputKind.SIGMOID,
) -> float:
    """Unweighted mean cross-entropy over the meta examples."""
    p = as_dense(probs_meta, "probs_meta")
    if p.shape[0] == 0:
        raise ParameterError("meta set is empty")
    ce = per_example_ce(p, labels_meta, output)
    value, _ = weighted_loss(ce, np.full(len(ce), 1.0 / len(ce)))
    return value
