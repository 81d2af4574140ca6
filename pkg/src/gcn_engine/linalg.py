"""
Dense & Sparse Linear Algebra
-----------------------------
Thin, checked layer over numpy (dense, row-major float64) and scipy CSR
matrices. All model math goes through these helpers so shape mistakes and
non-finite values surface as engine errors instead of silent broadcasting.

DenseMatrix  → numpy.ndarray, 2-D, float64, C-contiguous
SparseMatrix → scipy.sparse.csr_matrix, float64, canonical (sorted, no duplicates)
"""

from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from src.gcn_engine.exceptions import ShapeError, NumericError

DenseMatrix = np.ndarray
SparseMatrix = sp.csr_matrix


class ElementwiseKind(str, Enum):
    ADD = "add"
    SUB = "sub"
    HADAMARD = "hadamard"


# =========================================================
# 🧩 Construction & Validation
# =========================================================
def as_dense(a, name: str = "matrix") -> DenseMatrix:
    """Coerce to a 2-D C-contiguous float64 array."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def as_csr(s) -> SparseMatrix:
    """Canonical CSR copy: float64, duplicates summed, explicit zeros dropped, indices sorted."""
    csr = sp.csr_matrix(s, dtype=np.float64, copy=True)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


def identity_csr(n: int) -> SparseMatrix:
    return sp.identity(n, dtype=np.float64, format="csr")


def densify(s: SparseMatrix) -> DenseMatrix:
    return np.ascontiguousarray(s.toarray(), dtype=np.float64)


def is_structurally_symmetric(s: SparseMatrix) -> bool:
    """True when (i, j) is stored iff (j, i) is stored."""
    if s.shape[0] != s.shape[1]:
        return False
    pattern = as_csr(s)
    pattern.data[:] = 1.0
    return (pattern != pattern.T).nnz == 0


def _check_finite(m: DenseMatrix, op: str) -> DenseMatrix:
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{op} produced non-finite values")
    return m


def _require_same_shape(a: DenseMatrix, b: DenseMatrix, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# =========================================================
# ✖️ Products
# =========================================================
def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Dense matrix product a @ b."""
    a, b = as_dense(a, "a"), as_dense(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} x {b.shape} (inner dimensions differ)")
    return _check_finite(np.ascontiguousarray(a @ b), "matmul")


def spmm(s: SparseMatrix, d: DenseMatrix) -> DenseMatrix:
    """Sparse (CSR) times dense; row-oriented accumulation in stored column order."""
    d = as_dense(d, "d")
    if s.shape[1] != d.shape[0]:
        raise ShapeError(f"spmm: {s.shape} x {d.shape} (inner dimensions differ)")
    return _check_finite(np.ascontiguousarray(s @ d), "spmm")


# =========================================================
# ➕ Entrywise Operations
# =========================================================
def elementwise(a: DenseMatrix, b: DenseMatrix, kind: ElementwiseKind | str) -> DenseMatrix:
    """Entrywise add / sub / hadamard of two equally shaped matrices."""
    kind = ElementwiseKind(kind)
    a, b = as_dense(a, "a"), as_dense(b, "b")
    _require_same_shape(a, b, kind.value)
    if kind is ElementwiseKind.ADD:
        out = a + b
    elif kind is ElementwiseKind.SUB:
        out = a - b
    else:
        out = a * b
    return _check_finite(out, kind.value)


def scale(a: DenseMatrix, c: float) -> DenseMatrix:
    return _check_finite(as_dense(a) * float(c), "scale")


def transpose(a: DenseMatrix) -> DenseMatrix:
    return np.ascontiguousarray(as_dense(a).T)


def row_sum(a: DenseMatrix) -> np.ndarray:
    """Per-row sums as a 1-D vector of length rows."""
    return _check_finite(as_dense(a).sum(axis=1), "row_sum")


def frobenius_dot(a: DenseMatrix, b: DenseMatrix) -> float:
    """Σᵢⱼ aᵢⱼ bᵢⱼ."""
    a, b = as_dense(a, "a"), as_dense(b, "b")
    _require_same_shape(a, b, "frobenius_dot")
    value = float(np.dot(a.ravel(), b.ravel()))
    if not np.isfinite(value):
        raise NumericError("frobenius_dot produced a non-finite value")
    return value


def frobenius_dot_sets(xs: Sequence[DenseMatrix], ys: Sequence[DenseMatrix]) -> float:
    """Inner product of two parameter sets (sum of per-matrix Frobenius products, in order)."""
    if len(xs) != len(ys):
        raise ShapeError(f"frobenius_dot_sets: {len(xs)} vs {len(ys)} matrices")
    total = 0.0
    for x, y in zip(xs, ys):
        total += frobenius_dot(x, y)
    return total
