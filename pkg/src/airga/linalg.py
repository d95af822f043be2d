"""Sparse and dense linear-algebra kernels.

Sparse operators are ``scipy.sparse.csr_matrix`` instances kept in canonical
form (sorted column indices, no stored zeros). Dense blocks are two
dimensional ``numpy`` arrays of ``float64``.
"""
import logging
import warnings
from typing import NamedTuple, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse

logger = logging.getLogger(__name__)

SparseMatrix = scipy.sparse.csr_matrix
DenseMatrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]

SINGULAR_PIVOT_TOL = 1e-14
RANK_TOL = 1e-12


class AirgaError(Exception):
    pass


class DimensionError(AirgaError, ValueError):
    pass


class SingularMatrixError(AirgaError):
    def __init__(self, message: str, pivot: int) -> None:
        super().__init__(message)
        self.pivot = pivot


class NumericalError(AirgaError):
    pass


class QRResult(NamedTuple):
    q: DenseMatrix
    r: DenseMatrix
    rank: int


def as_sparse(
    matrix: Union[SparseMatrix, scipy.sparse.spmatrix, npt.ArrayLike]
) -> SparseMatrix:
    """Returns a canonical CSR copy of ``matrix``.

    Exact zeros are pruned and column indices are sorted within each row.
    """
    if scipy.sparse.issparse(matrix):
        csr = scipy.sparse.csr_matrix(matrix, dtype=np.float64, copy=True)
    else:
        dense = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        csr = scipy.sparse.csr_matrix(dense)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


def identity(n: int) -> SparseMatrix:
    return as_sparse(scipy.sparse.identity(n, format="csr"))


def spmv(a: SparseMatrix, x: npt.ArrayLike) -> Vector:
    """Sparse matrix-vector product ``a @ x`` with row-major accumulation."""
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != a.shape[1]:
        raise DimensionError(
            f"Cannot multiply {a.shape[0]}x{a.shape[1]} matrix with vector "
            f"of shape {vec.shape}"
        )
    return np.asarray(a @ vec, dtype=np.float64)


def sp_add_scaled(
    a: SparseMatrix, b: SparseMatrix, alpha: float, beta: float
) -> SparseMatrix:
    """Returns ``alpha * a + beta * b`` on the union of both sparsity patterns."""
    if a.shape != b.shape:
        raise DimensionError(f"Shape mismatch: {a.shape} vs {b.shape}")
    result = as_sparse(alpha * a + beta * b)
    return result


def trace_inner(
    a: Union[SparseMatrix, DenseMatrix], b: Union[SparseMatrix, DenseMatrix]
) -> float:
    """Returns trace(a^T b), the sum of the entrywise products."""
    if a.shape != b.shape:
        raise DimensionError(f"Shape mismatch: {a.shape} vs {b.shape}")
    if scipy.sparse.issparse(a) or scipy.sparse.issparse(b):
        left = as_sparse(a)
        right = as_sparse(b)
        product = left.multiply(right)
        return float(np.sum(product.data))
    return float(np.sum(np.asarray(a) * np.asarray(b)))


def frob_norm(a: Union[SparseMatrix, DenseMatrix]) -> float:
    """Frobenius norm, computed along the same path as ``trace_inner(a, a)``."""
    return float(np.sqrt(trace_inner(a, a)))


def thin_qr(a: DenseMatrix) -> QRResult:
    """Householder QR ``a = q @ r`` with a nonnegative diagonal on ``r``.

    Columns that depend on earlier ones show up as (numerically) zero diagonal
    entries of ``r`` and are reported through ``rank``.
    """
    block = np.asarray(a, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] < block.shape[1]:
        raise DimensionError(f"thin_qr needs a tall matrix, got shape {block.shape}")
    if block.shape[1] == 0:
        return QRResult(np.zeros((block.shape[0], 0)), np.zeros((0, 0)), 0)
    q, r = scipy.linalg.qr(block, mode="economic")
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * signs
    r = signs[:, np.newaxis] * r
    scale = frob_norm(block)
    diagonal = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diagonal > RANK_TOL * scale)) if scale > 0 else 0
    return QRResult(q, r, rank)


def orthonormalize(a: DenseMatrix) -> DenseMatrix:
    """Returns an orthonormal basis of range(a), dropping dependent columns.

    Uses column-pivoted QR so that the leading ``rank`` columns of ``q`` span
    the range even when dependent columns sit in the middle of ``a``.
    """
    block = np.asarray(a, dtype=np.float64)
    if block.shape[1] == 0:
        return np.zeros((block.shape[0], 0))
    q, r, _ = scipy.linalg.qr(block, mode="economic", pivoting=True)
    scale = frob_norm(block)
    if scale == 0.0:
        return np.zeros((block.shape[0], 0))
    diagonal = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diagonal > RANK_TOL * scale))
    if rank < block.shape[1]:
        logger.warning(
            f"Dropping {block.shape[1] - rank} dependent column(s) of a "
            f"{block.shape[0]}x{block.shape[1]} block"
        )
    basis: DenseMatrix = np.ascontiguousarray(q[:, :rank])
    return basis


def dense_solve(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Solves ``a x = b`` by LU with partial pivoting.

    Raises:
        SingularMatrixError: a pivot falls below 1e-14 * ||a||_F.
    """
    lhs = np.asarray(a)
    rhs = np.asarray(b)
    if lhs.ndim != 2 or lhs.shape[0] != lhs.shape[1]:
        raise DimensionError(f"dense_solve needs a square matrix, got {lhs.shape}")
    if rhs.shape[0] != lhs.shape[0]:
        raise DimensionError(
            f"Right-hand side has {rhs.shape[0]} rows, matrix has {lhs.shape[0]}"
        )
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        raise NumericalError("dense_solve received nonfinite values")
    if lhs.shape[0] == 0:
        return np.zeros(rhs.shape, dtype=np.result_type(lhs, rhs, np.float64))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(lhs, check_finite=False)
    pivots = np.abs(np.diag(lu))
    threshold = SINGULAR_PIVOT_TOL * float(np.linalg.norm(lhs))
    small = np.flatnonzero(pivots <= threshold)
    if small.size:
        raise SingularMatrixError(
            f"Matrix is singular to working precision at pivot {int(small[0])}",
            int(small[0]),
        )
    solution = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    return np.asarray(solution)
