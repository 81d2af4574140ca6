"""
Evaluation Metrics
------------------
Accuracy, macro-F1 and AUC-ROC for node predictions.

- Binary: a node is predicted positive when its positive-class score ≥ 0.5.
- More classes: argmax.
- AUC in Mann-Whitney form on the positive-class score, ties count ½.
- Macro-F1 through scikit-learn with zero_division=0 over every class index.
"""

from typing import Optional

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import accuracy_score, f1_score

from src.gcn_engine.constants import DECISION_THRESHOLD
from src.gcn_engine.exceptions import ParameterError, ShapeError, UndefinedMetricError
from src.models.training import MetricReport


def _as_scores(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim == 1:
        # positive-class scores of a binary problem
        s = np.column_stack([1.0 - s, s])
    if s.ndim != 2:
        raise ShapeError(f"scores must be (N,) or (N, C), got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ParameterError("scores must be finite")
    return s


def _as_labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64).ravel()
    if y.shape[0] != n:
        raise ShapeError(f"{y.shape[0]} labels for {n} scores")
    return y


# =========================================================
# 🏷️ Predictions
# =========================================================
def predict_labels(scores, positive_class: int = 1) -> np.ndarray:
    """Hard labels from (N, C) scores, or from (N,) positive-class scores."""
    s = _as_scores(scores)
    n_classes = s.shape[1]
    if n_classes == 2:
        if positive_class not in (0, 1):
            raise ParameterError(f"positive_class must be 0 or 1, got {positive_class}")
        positive = s[:, positive_class] >= DECISION_THRESHOLD
        return np.where(positive, positive_class, 1 - positive_class).astype(np.int64)
    return np.argmax(s, axis=1).astype(np.int64)


# =========================================================
# 📈 Scalar Metrics
# =========================================================
def auc_roc(positive_scores, is_positive) -> float:
    """
    P(score of a random positive > score of a random negative), ties ½.

    Computed from average ranks: U = Σ rank(positive) − n⁺(n⁺ + 1)/2.
    """
    scores = np.asarray(positive_scores, dtype=np.float64).ravel()
    mask = np.asarray(is_positive, dtype=bool).ravel()
    if scores.shape != mask.shape:
        raise ShapeError(f"{scores.shape[0]} scores for {mask.shape[0]} labels")

    n_pos = int(mask.sum())
    n_neg = mask.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC-ROC is undefined when only one class is present")

    ranks = rankdata(scores, method="average")
    u_statistic = ranks[mask].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def macro_f1(labels, predictions, n_classes: int) -> float:
    """Unweighted mean of per-class F1; a class with no true and no predicted members scores 0."""
    return float(
        f1_score(labels, predictions, labels=list(range(n_classes)), average="macro", zero_division=0)
    )


def compute_metrics(scores, labels, positive_class: int = 1, n_classes: Optional[int] = None) -> MetricReport:
    """
    Evaluate one prediction set.

    Args:
        scores: (N, C) probabilities, or (N,) positive-class scores.
        labels: true class indices.
        positive_class: class whose score drives thresholding and AUC.
        n_classes: class count for macro-F1 (defaults to the score width).
    """
    s = _as_scores(scores)
    y = _as_labels(labels, s.shape[0])
    n_classes = n_classes or s.shape[1]
    if not 0 <= positive_class < s.shape[1]:
        raise ParameterError(f"positive_class {positive_class} outside [0, {s.shape[1]})")

    predictions = predict_labels(s, positive_class)
    return MetricReport(
        accuracy=float(accuracy_score(y, predictions)),
        macro_f1=macro_f1(y, predictions, n_classes),
        auc_roc=auc_roc(s[:, positive_class], y == positive_class),
    )
