"""
Optimizers
----------
Parameter updates for the weighted training step. Both return new GcnParams
and leave their input untouched.
"""

from typing import List, Sequence

import numpy as np

from src.gcn_engine.exceptions import NumericError, ParameterError, ShapeError
from src.gcn_engine.linalg import DenseMatrix
from src.gcn_engine.model import GcnParams
from src.models.training import OptimizerKind, TrainerConfig


def _check_gradients(params: GcnParams, grads: Sequence[DenseMatrix]) -> None:
    if len(grads) != params.n_layers:
        raise ShapeError(f"{len(grads)} gradients for {params.n_layers} layers")
    for l, (g, theta) in enumerate(zip(grads, params.layers)):
        if g.shape != theta.shape:
            raise ShapeError(f"gradient {l + 1} is {g.shape}, θ^{l + 1} is {theta.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in layer {l + 1}")


class SgdOptimizer:
    """θ ← θ − α·∇."""

    def __init__(self, lr: float):
        if lr <= 0:
            raise ParameterError(f"learning rate must be positive, got {lr}")
        self.lr = float(lr)

    def step(self, params: GcnParams, grads: Sequence[DenseMatrix]) -> GcnParams:
        _check_gradients(params, grads)
        return params.axpy(grads, -self.lr)


class AdamOptimizer:
    """Adam with bias-corrected moments; state lives on the optimizer instance."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ParameterError(f"learning rate must be positive, got {lr}")
        self.lr, self.beta1, self.beta2, self.eps = float(lr), float(beta1), float(beta2), float(eps)
        self.t = 0
        self._m: List[DenseMatrix] = []
        self._v: List[DenseMatrix] = []

    def step(self, params: GcnParams, grads: Sequence[DenseMatrix]) -> GcnParams:
        _check_gradients(params, grads)
        if not self._m:
            self._m = params.zeros_like()
            self._v = params.zeros_like()

        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        layers = []
        for l, (theta, g) in enumerate(zip(params.layers, grads)):
            self._m[l] = self.beta1 * self._m[l] + (1.0 - self.beta1) * g
            self._v[l] = self.beta2 * self._v[l] + (1.0 - self.beta2) * g * g
            m_hat = self._m[l] / correction1
            v_hat = self._v[l] / correction2
            layers.append(theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        return GcnParams(layers)


def build_optimizer(cfg: TrainerConfig):
    """Optimizer for the weighted update, learning rate α."""
    if OptimizerKind(cfg.optimizer) is OptimizerKind.ADAM:
        return AdamOptimizer(cfg.alpha, cfg.beta1, cfg.beta2, cfg.adam_eps)
    return SgdOptimizer(cfg.alpha)
