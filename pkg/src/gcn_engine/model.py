"""
GCN & MLP Models
----------------
Full-batch graph convolutional network with analytic gradients.

    Z^0 = X
    Z^l = act(Â Z^{l-1} θ^l)      hidden layers (ReLU by default)
    Z^n = Â Z^{n-1} θ^n           logits
    f   = sigmoid(Z^n)            (softmax available as a toggle)

No biases. The MLP baseline is the same network with Â replaced by the
identity (no propagation). Besides reverse mode (`gcn_backward`) the module
offers a forward-mode directional derivative of the logits
(`logits_jvp`), which gives every per-node ∂zᵢ/∂θ · v in a single pass.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence

import joblib
import numpy as np
from scipy.special import expit, softmax

from src.gcn_engine.exceptions import ContractViolation, ParameterError, ShapeError
from src.gcn_engine.linalg import (
    DenseMatrix,
    SparseMatrix,
    as_dense,
    elementwise,
    matmul,
    spmm,
    transpose,
)
from src.utils.logger import logger


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"


class OutputKind(str, Enum):
    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"


# =========================================================
# 🧩 Parameter & Cache Containers
# =========================================================
@dataclass
class GcnParams:
    """Layer weights θ^1..θ^n; θ^l maps width_{l-1} → width_l."""
    layers: List[DenseMatrix]

    def __post_init__(self):
        self.layers = [as_dense(layer, f"θ^{i + 1}") for i, layer in enumerate(self.layers)]
        for i in range(1, len(self.layers)):
            if self.layers[i - 1].shape[1] != self.layers[i].shape[0]:
                raise ShapeError(
                    f"layer {i} outputs {self.layers[i - 1].shape[1]} units, "
                    f"layer {i + 1} expects {self.layers[i].shape[0]}"
                )

    @property
    def widths(self) -> List[int]:
        return [self.layers[0].shape[0]] + [layer.shape[1] for layer in self.layers]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n_parameters(self) -> int:
        return sum(layer.size for layer in self.layers)

    def copy(self) -> "GcnParams":
        return GcnParams([layer.copy() for layer in self.layers])

    def axpy(self, direction: Sequence[DenseMatrix], step: float) -> "GcnParams":
        """New parameters θ + step · direction."""
        if len(direction) != self.n_layers:
            raise ShapeError(f"direction has {len(direction)} matrices, params have {self.n_layers}")
        return GcnParams([layer + step * d for layer, d in zip(self.layers, direction)])

    def zeros_like(self) -> List[DenseMatrix]:
        return [np.zeros_like(layer) for layer in self.layers]


@dataclass
class ForwardCache:
    """Intermediates of one forward pass, kept for backward / JVP."""
    inputs: List[DenseMatrix]            # H^l = Â Z^{l-1} (or Z^{l-1} without propagation)
    pre_activations: List[DenseMatrix]   # P^l = H^l θ^l
    activations: List[DenseMatrix]       # Z^0 .. Z^n (Z^n = logits)
    probabilities: DenseMatrix
    activation: Activation = Activation.RELU
    output: OutputKind = OutputKind.SIGMOID
    propagated: bool = True

    @property
    def logits(self) -> DenseMatrix:
        return self.activations[-1]


# =========================================================
# 🎲 Initialization
# =========================================================
def init_params(widths: Sequence[int], seed: int) -> GcnParams:
    """Glorot-uniform weights, bound √(6/(fan_in + fan_out)), deterministic per seed."""
    widths = [int(w) for w in widths]
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ParameterError(f"widths must list at least two positive sizes, got {widths}")

    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
    return GcnParams(layers)


# =========================================================
# 🔧 Helpers
# =========================================================
def _propagate(a_hat: Optional[SparseMatrix], m: DenseMatrix) -> DenseMatrix:
    return m if a_hat is None else spmm(a_hat, m)


def _propagate_transposed(a_hat: Optional[SparseMatrix], m: DenseMatrix) -> DenseMatrix:
    return m if a_hat is None else spmm(a_hat.T.tocsr(), m)


def _activate(p: DenseMatrix, activation: Activation) -> DenseMatrix:
    return np.maximum(p, 0.0) if activation is Activation.RELU else p


def _activation_grad(p: DenseMatrix, activation: Activation) -> DenseMatrix:
    if activation is Activation.RELU:
        return (p > 0.0).astype(np.float64)
    return np.ones_like(p)


def output_probabilities(logits: DenseMatrix, output: OutputKind | str = OutputKind.SIGMOID) -> DenseMatrix:
    """Entrywise sigmoid or row-wise softmax of the logits."""
    output = OutputKind(output)
    if output is OutputKind.SIGMOID:
        return expit(logits)
    return softmax(logits, axis=1)


# =========================================================
# ➡️ Forward Pass
# =========================================================
def _forward(
    params: GcnParams,
    a_hat: Optional[SparseMatrix],
    x,
    activation: Activation | str,
    output: OutputKind | str,
) -> ForwardCache:
    activation, output = Activation(activation), OutputKind(output)
    x = as_dense(x, "x")
    if x.shape[1] != params.widths[0]:
        raise ShapeError(f"x has {x.shape[1]} features, θ^1 expects {params.widths[0]}")
    if a_hat is not None and a_hat.shape != (x.shape[0], x.shape[0]):
        raise ShapeError(f"a_hat is {a_hat.shape}, expected ({x.shape[0]}, {x.shape[0]})")

    inputs, pre_activations, activations = [], [], [x]
    z = x
    for l, theta in enumerate(params.layers):
        h = _propagate(a_hat, z)
        p = matmul(h, theta)
        is_last = l == params.n_layers - 1
        z = p if is_last else _activate(p, activation)
        inputs.append(h)
        pre_activations.append(p)
        activations.append(z)

    return ForwardCache(
        inputs=inputs,
        pre_activations=pre_activations,
        activations=activations,
        probabilities=output_probabilities(z, output),
        activation=activation,
        output=output,
        propagated=a_hat is not None,
    )


def gcn_forward(
    params: GcnParams,
    a_hat: SparseMatrix,
    x,
    activation: Activation | str = Activation.RELU,
    output: OutputKind | str = OutputKind.SIGMOID,
) -> ForwardCache:
    """GCN forward pass over the whole graph."""
    if a_hat is None:
        raise ShapeError("gcn_forward needs a propagation matrix")
    return _forward(params, a_hat, x, activation, output)


def mlp_forward(
    params: GcnParams,
    x,
    activation: Activation | str = Activation.RELU,
    output: OutputKind | str = OutputKind.SIGMOID,
) -> ForwardCache:
    """Same network without propagation (Â = I)."""
    return _forward(params, None, x, activation, output)


# =========================================================
# ⬅️ Reverse Mode
# =========================================================
def _check_cache(cache: ForwardCache, params: GcnParams, a_hat: Optional[SparseMatrix]) -> None:
    if len(cache.inputs) != params.n_layers:
        raise ContractViolation(f"cache holds {len(cache.inputs)} layers, params have {params.n_layers}")
    for l, (h, theta) in enumerate(zip(cache.inputs, params.layers)):
        if h.shape[1] != theta.shape[0]:
            raise ContractViolation(f"cache layer {l + 1} width {h.shape[1]} does not match θ {theta.shape}")
    if cache.propagated != (a_hat is not None):
        raise ContractViolation("cache was built with a different propagation setting")


def _backward(
    cache: ForwardCache,
    params: GcnParams,
    a_hat: Optional[SparseMatrix],
    per_node_loss_grad,
) -> List[DenseMatrix]:
    _check_cache(cache, params, a_hat)
    g = as_dense(per_node_loss_grad, "per_node_loss_grad")
    if g.shape != cache.logits.shape:
        raise ShapeError(f"upstream gradient {g.shape} does not match logits {cache.logits.shape}")

    grads: List[DenseMatrix] = [None] * params.n_layers
    for l in range(params.n_layers - 1, -1, -1):
        grads[l] = matmul(transpose(cache.inputs[l]), g)
        if l > 0:
            d_inputs = matmul(g, transpose(params.layers[l]))
            d_z = _propagate_transposed(a_hat, d_inputs)
            g = elementwise(d_z, _activation_grad(cache.pre_activations[l - 1], cache.activation), "hadamard")
    return grads


def gcn_backward(
    cache: ForwardCache,
    params: GcnParams,
    a_hat: SparseMatrix,
    per_node_loss_grad,
) -> List[DenseMatrix]:
    """
    Gradients ∂L/∂θ^l for all layers given G = ∂L/∂Z^n (N×C).

    For two layers: ∂L/∂θ² = (ÂZ¹)ᵀG₂,  G₁ = (Âᵀ G₂ θ²ᵀ) ⊙ act′(P¹),  ∂L/∂θ¹ = (ÂX)ᵀG₁.
    """
    if a_hat is None:
        raise ShapeError("gcn_backward needs a propagation matrix")
    return _backward(cache, params, a_hat, per_node_loss_grad)


def mlp_backward(cache: ForwardCache, params: GcnParams, per_node_loss_grad) -> List[DenseMatrix]:
    return _backward(cache, params, None, per_node_loss_grad)


# =========================================================
# ↗️ Forward Mode
# =========================================================
def logits_jvp(
    cache: ForwardCache,
    params: GcnParams,
    a_hat: Optional[SparseMatrix],
    direction: Sequence[DenseMatrix],
) -> DenseMatrix:
    """
    Directional derivative of the logits, d/dε Z^n(θ + ε·v) at ε = 0.
    Row i dotted with ∂lᵢ/∂zᵢ equals ⟨∇θ lᵢ, v⟩.
    """
    _check_cache(cache, params, a_hat)
    if len(direction) != params.n_layers:
        raise ShapeError(f"direction has {len(direction)} matrices, params have {params.n_layers}")

    d_z = np.zeros_like(cache.activations[0])
    d_p = None
    for l, (theta, v) in enumerate(zip(params.layers, direction)):
        v = as_dense(v, f"direction[{l}]")
        if v.shape != theta.shape:
            raise ShapeError(f"direction[{l}] is {v.shape}, θ^{l + 1} is {theta.shape}")
        d_h = _propagate(a_hat, d_z)
        d_p = matmul(d_h, theta) + matmul(cache.inputs[l], v)
        if l < params.n_layers - 1:
            d_z = d_p * _activation_grad(cache.pre_activations[l], cache.activation)
    return d_p


# =========================================================
# 💾 Checkpoints
# =========================================================
def save_params(params: GcnParams, path: str | Path) -> Path:
    """Dump layer shapes and row-major values (joblib, bit-exact round-trip)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    joblib.dump({"widths": params.widths, "layers": [layer.copy() for layer in params.layers]}, path)
    logger.debug(f"[MODEL] Parameters saved: {path}")
    return path


def load_params(path: str | Path) -> GcnParams:
    payload = joblib.load(Path(path))
    params = GcnParams(payload["layers"])
    if params.widths != list(payload["widths"]):
        raise ContractViolation(f"checkpoint widths {payload['widths']} do not match layers {params.widths}")
    return params
