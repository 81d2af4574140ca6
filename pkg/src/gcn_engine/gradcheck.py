"""
Finite-Difference Gradient Checks
---------------------------------
Random small instances (N ≤ 10, F ≤ 4, C = 2) on which analytic derivatives
are compared with central differences:

- model:    ∂L/∂θ of GCN and MLP         ε = 1e-5, rtol 1e-6, atol 1e-8
- meta:     gᵢ vs ∂L^meta(θ̂(γ))/∂γᵢ      h = 1e-3, rtol 1e-4, atol 1e-7
- linearity: Σᵢ ∇θ lᵢ equals the full-batch gradient, and the forward-mode
  meta-gradient equals the per-example one.

Instances whose ReLU pre-activations sit too close to the kink are redrawn.
"""

from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field

from src.data.meta_set import MetaSet
from src.gcn_engine.graph import GraphData, induced_subgraph
from src.gcn_engine.losses import one_hot, per_example_ce, weighted_loss
from src.gcn_engine.meta_trainer import (
    meta_gradient,
    per_example_param_gradients,
    perturbed_meta_loss,
)
from src.gcn_engine.model import GcnParams, gcn_backward, gcn_forward, init_params, mlp_backward, mlp_forward
from src.models.training import Architecture, MetaGradientMethod, TrainerConfig
from src.utils.logger import logger

MODEL_EPS, MODEL_RTOL, MODEL_ATOL = 1e-5, 1e-6, 1e-8
META_STEP, META_RTOL, META_ATOL = 1e-3, 1e-4, 1e-7
KINK_MARGIN = 1e-2
MAX_DRAWS = 50


# =========================================================
# 📋 Report Models
# =========================================================
class GradcheckCase(BaseModel):
    check: str = Field(..., description="model_gcn | model_mlp | meta_gradient | linearity")
    instance: int
    n_nodes: int
    n_features: int
    max_error: float = Field(..., description="Largest |analytic − numeric| / max(tolerance floor, rtol·scale)")
    passed: bool


class GradcheckReport(BaseModel):
    cases: List[GradcheckCase] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.cases) and all(case.passed for case in self.cases)

    @property
    def failures(self) -> List[GradcheckCase]:
        return [case for case in self.cases if not case.passed]


def _excess(analytic: np.ndarray, numeric: np.ndarray, rtol: float, atol: float) -> float:
    """max over entries of |a − n| / max(atol, rtol·max(|a|, |n|)); ≤ 1 means within tolerance."""
    analytic, numeric = np.ravel(analytic), np.ravel(numeric)
    allowed = np.maximum(atol, rtol * np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / allowed)) if analytic.size else 0.0


# =========================================================
# 🎲 Random Instances
# =========================================================
class GradcheckInstance:
    """Random graph, features, labels, parameters, train / meta split."""

    def __init__(self, seed: int, activation: str = "relu"):
        rng = np.random.default_rng(seed)
        self.n_nodes = int(rng.integers(3, 11))
        self.n_features = int(rng.integers(1, 5))
        self.n_classes = 2

        upper = np.triu(rng.random((self.n_nodes, self.n_nodes)) < 0.4, k=1)
        self.graph = GraphData.from_adjacency(sp.csr_matrix((upper | upper.T).astype(np.float64)))
        self.x = rng.standard_normal((self.n_nodes, self.n_features))
        self.labels = rng.integers(0, self.n_classes, size=self.n_nodes)
        self.y = one_hot(self.labels, self.n_classes)
        self.params = init_params([self.n_features, 4, self.n_classes], int(rng.integers(0, 2**31)))

        n_train = int(rng.integers(1, self.n_nodes))
        order = rng.permutation(self.n_nodes)
        self.train_idx = np.sort(order[:n_train])
        meta_nodes = np.sort(rng.choice(self.n_nodes, size=int(rng.integers(1, self.n_nodes + 1)), replace=False))
        self.meta = MetaSet(
            node_indices=meta_nodes,
            features=self.x[meta_nodes],
            labels=self.labels[meta_nodes],
            graph=induced_subgraph(self.graph, meta_nodes),
        )
        self.activation = activation

    def kink_free(self) -> bool:
        if self.activation != "relu":
            return True
        caches = [
            gcn_forward(self.params, self.graph.a_hat, self.x),
            gcn_forward(self.params, self.meta.graph.a_hat, self.meta.features),
            mlp_forward(self.params, self.x),
            mlp_forward(self.params, self.meta.features),
        ]
        return all(np.min(np.abs(p)) > KINK_MARGIN for c in caches for p in c.pre_activations[:-1])


def draw_instance(seed: int, activation: str = "relu") -> GradcheckInstance:
    for attempt in range(MAX_DRAWS):
        instance = GradcheckInstance(seed * MAX_DRAWS + attempt, activation)
        if instance.kink_free():
            return instance
    return instance


# =========================================================
# 🧮 Central Differences
# =========================================================
def numeric_param_gradient(loss: Callable[[GcnParams], float], params: GcnParams, eps: float) -> List[np.ndarray]:
    grads = []
    for l, layer in enumerate(params.layers):
        grad = np.zeros_like(layer)
        for index in np.ndindex(layer.shape):
            plus, minus = params.copy(), params.copy()
            plus.layers[l][index] += eps
            minus.layers[l][index] -= eps
            grad[index] = (loss(plus) - loss(minus)) / (2.0 * eps)
        grads.append(grad)
    return grads


def _weighted_model_loss(instance: GradcheckInstance, architecture: Architecture, w: np.ndarray):
    a_hat = instance.graph.a_hat

    def forward(params: GcnParams):
        if architecture is Architecture.MLP:
            return mlp_forward(params, instance.x)
        return gcn_forward(params, a_hat, instance.x)

    def loss(params: GcnParams) -> float:
        value, _ = weighted_loss(per_example_ce(forward(params).probabilities, instance.y), w)
        return value

    def analytic(params: GcnParams) -> List[np.ndarray]:
        cache = forward(params)
        _, upstream = weighted_loss(per_example_ce(cache.probabilities, instance.y), w)
        if architecture is Architecture.MLP:
            return mlp_backward(cache, params, upstream)
        return gcn_backward(cache, params, a_hat, upstream)

    return loss, analytic


def check_model_gradients(instance: GradcheckInstance, architecture: Architecture) -> float:
    w = np.random.default_rng(instance.n_nodes).random(instance.n_nodes)
    loss, analytic = _weighted_model_loss(instance, architecture, w)
    numeric = numeric_param_gradient(loss, instance.params, MODEL_EPS)
    return max(
        _excess(a, n, MODEL_RTOL, MODEL_ATOL) for a, n in zip(analytic(instance.params), numeric)
    )


def numeric_meta_gradient(instance: GradcheckInstance, cfg: TrainerConfig, step: float = META_STEP) -> np.ndarray:
    n_train = instance.train_idx.size
    g = np.zeros(n_train)
    for i in range(n_train):
        gamma = np.zeros(n_train)
        gamma[i] = step
        plus = perturbed_meta_loss(
            instance.params, instance.graph, instance.x, instance.y, instance.train_idx, instance.meta, cfg, gamma
        )
        minus = perturbed_meta_loss(
            instance.params, instance.graph, instance.x, instance.y, instance.train_idx, instance.meta, cfg, -gamma
        )
        g[i] = (plus - minus) / (2.0 * step)
    return g


def check_meta_gradient(instance: GradcheckInstance, cfg: TrainerConfig) -> float:
    analytic = meta_gradient(
        instance.params, instance.graph, instance.x, instance.y, instance.train_idx, instance.meta, cfg
    )
    return _excess(analytic, numeric_meta_gradient(instance, cfg), META_RTOL, META_ATOL)


def check_linearity(instance: GradcheckInstance, cfg: TrainerConfig) -> float:
    """Per-example gradients sum to the full-batch one; jvp and per-example meta-gradients agree."""
    per_example = per_example_param_gradients(
        instance.params, instance.graph, instance.x, instance.y, instance.train_idx, cfg
    )
    cache = gcn_forward(instance.params, instance.graph.a_hat, instance.x)
    upstream = np.zeros_like(cache.logits)
    upstream[instance.train_idx] = per_example_ce(
        cache.probabilities[instance.train_idx], instance.y[instance.train_idx]
    ).residuals
    full = gcn_backward(cache, instance.params, instance.graph.a_hat, upstream)
    summed = [sum(g[l] for g in per_example) for l in range(instance.params.n_layers)]
    excess = max(_excess(s, f, 1e-10, 1e-12) for s, f in zip(summed, full))

    args = (instance.params, instance.graph, instance.x, instance.y, instance.train_idx, instance.meta)
    by_jvp = meta_gradient(*args, cfg.model_copy(update={"meta_gradient": MetaGradientMethod.JVP}))
    by_examples = meta_gradient(*args, cfg.model_copy(update={"meta_gradient": MetaGradientMethod.PER_EXAMPLE}))
    return max(excess, _excess(by_jvp, by_examples, 1e-9, 1e-12))


# =========================================================
# 🚀 Suite
# =========================================================
def run_gradcheck(instances: int = 20, seed: int = 0, alpha: float = 0.1, cfg: Optional[TrainerConfig] = None) -> GradcheckReport:
    """Run every check on `instances` random draws; the report lists one case per (check, draw)."""
    cfg = cfg or TrainerConfig(alpha=alpha, hidden=[4])
    report = GradcheckReport()
    for k in range(instances):
        instance = draw_instance(seed + k, cfg.activation.value)
        checks = {
            "model_gcn": lambda: check_model_gradients(instance, Architecture.GCN),
            "model_mlp": lambda: check_model_gradients(instance, Architecture.MLP),
            "meta_gradient": lambda: check_meta_gradient(instance, cfg),
            "linearity": lambda: check_linearity(instance, cfg),
        }
        for name, run in checks.items():
            error = run()
            report.cases.append(GradcheckCase(
                check=name,
                instance=k,
                n_nodes=instance.n_nodes,
                n_features=instance.n_features,
                max_error=error,
                passed=error <= 1.0,
            ))
            if error > 1.0:
                logger.warning(f"[GRADCHECK] {name} failed on instance {k} (error ratio {error:.3g})")

    logger.info(
        f"[GRADCHECK] {len(report.cases) - len(report.failures)}/{len(report.cases)} checks passed "
        f"over {instances} instances"
    )
    return report
