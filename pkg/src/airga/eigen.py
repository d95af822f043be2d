"""Dense nonsymmetric eigenvalue kernels.

Used to refresh expansion points from reduced quadratic eigenvalue problems
and to compute exact H2 norms of small realizations.
"""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from airga.linalg import (
    AirgaError,
    DenseMatrix,
    DimensionError,
    dense_solve,
    frob_norm,
)

logger = logging.getLogger(__name__)


class ConvergenceError(AirgaError):
    pass


class StabilityError(AirgaError):
    def __init__(self, message: str, eigenvalues: npt.NDArray[np.complex128]) -> None:
        super().__init__(message)
        self.eigenvalues = eigenvalues


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real problem, sorted by real then imaginary part.

    Complex eigenvalues are stored as explicit conjugate pairs.
    ``residual_norms[i]`` is min ||C v - lambda_i v|| over unit vectors v for the
    companion matrix C, i.e. the residual of the best eigenvector.
    """

    eigenvalues: npt.NDArray[np.complex128]
    residual_norms: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return len(self.eigenvalues)


def real_schur(a: DenseMatrix) -> Tuple[DenseMatrix, DenseMatrix]:
    """Returns ``(q, t)`` with ``a = q @ t @ q.T`` and ``t`` quasi-upper-triangular."""
    matrix = np.asarray(a, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"real_schur needs a square matrix, got {matrix.shape}")
    try:
        t, q = scipy.linalg.schur(matrix, output="real")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceError(
            f"Schur decomposition of a {matrix.shape[0]}x{matrix.shape[0]} "
            f"matrix did not converge: {e}"
        ) from e
    return np.asarray(q), np.asarray(t)


def schur_eigenvalues(t: DenseMatrix) -> npt.NDArray[np.complex128]:
    """Reads the eigenvalues off the 1x1 and 2x2 diagonal blocks of ``t``."""
    n = t.shape[0]
    values: List[complex] = []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            a, b = t[i, i], t[i, i + 1]
            c, d = t[i + 1, i], t[i + 1, i + 1]
            mean = 0.5 * (a + d)
            disc = (0.5 * (a - d)) ** 2 + b * c
            if disc < 0.0:
                im = float(np.sqrt(-disc))
                values.append(complex(mean, -im))
                values.append(complex(mean, im))
            else:
                root = float(np.sqrt(disc))
                values.append(complex(mean - root, 0.0))
                values.append(complex(mean + root, 0.0))
            i += 2
        else:
            values.append(complex(t[i, i], 0.0))
            i += 1
    return np.array(values, dtype=np.complex128)


def sort_eigenvalues(values: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    order = np.lexsort((values.imag, values.real))
    return values[order]


def companion(mh: DenseMatrix, dh: DenseMatrix, kh: DenseMatrix) -> DenseMatrix:
    """First-order companion matrix [[0, I], [-M^-1 K, -M^-1 D]]."""
    r = mh.shape[0]
    m_inv_k = dense_solve(mh, kh)
    m_inv_d = dense_solve(mh, dh)
    return np.block([[np.zeros((r, r)), np.eye(r)], [-m_inv_k, -m_inv_d]])


def quad_eig(mh: DenseMatrix, dh: DenseMatrix, kh: DenseMatrix) -> Spectrum:
    """Solves (lambda^2 M + lambda D + K) v = 0 through the companion matrix.

    Args:
        mh (DenseMatrix): Mass matrix, must be invertible.
        dh (DenseMatrix): Damping matrix.
        kh (DenseMatrix): Stiffness matrix.

    Returns:
        Spectrum: All 2r eigenvalues with companion residuals.
    """
    mh, dh, kh = (np.atleast_2d(np.asarray(x, dtype=np.float64)) for x in (mh, dh, kh))
    if not (mh.shape == dh.shape == kh.shape) or mh.shape[0] != mh.shape[1]:
        raise DimensionError(
            f"quad_eig needs square matrices of equal shape, got "
            f"{mh.shape}, {dh.shape}, {kh.shape}"
        )
    matrix = companion(mh, dh, kh)
    _, t = real_schur(matrix)
    eigenvalues = sort_eigenvalues(schur_eigenvalues(t))
    identity = np.eye(matrix.shape[0])
    residuals = np.array(
        [
            scipy.linalg.svdvals(matrix.astype(np.complex128) - value * identity)[-1]
            for value in eigenvalues
        ]
    )
    logger.debug(f"quad_eig: {len(eigenvalues)} eigenvalues for r={mh.shape[0]}")
    return Spectrum(eigenvalues, residuals)


def quad_residual(
    mh: DenseMatrix, dh: DenseMatrix, kh: DenseMatrix, value: complex
) -> float:
    """Scaled residual of ``value`` as an eigenvalue of the quadratic problem.

    Returns ||Q(value) v|| / (|value|^2 ||M|| + |value| ||D|| + ||K||) for the
    unit vector v minimizing ||Q(value) v||.
    """
    q = value * value * mh + value * dh + kh
    smallest = float(scipy.linalg.svdvals(q)[-1])
    scale = abs(value) ** 2 * frob_norm(mh) + abs(value) * frob_norm(dh) + frob_norm(kh)
    return smallest / scale if scale > 0 else smallest


def lyap_solve(a: DenseMatrix, w: DenseMatrix) -> DenseMatrix:
    """Solves A P + P A^T + W = 0 for a Hurwitz matrix A.

    Raises:
        StabilityError: A has an eigenvalue with nonnegative real part.
    """
    matrix = np.asarray(a, dtype=np.float64)
    rhs = np.asarray(w, dtype=np.float64)
    if matrix.shape != rhs.shape or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(
            f"lyap_solve shape mismatch: {matrix.shape} vs {rhs.shape}"
        )
    _, t = real_schur(matrix)
    eigenvalues = schur_eigenvalues(t)
    unstable = eigenvalues[eigenvalues.real >= 0.0]
    if unstable.size:
        raise StabilityError(
            f"Matrix is not Hurwitz: {unstable.size} eigenvalue(s) with "
            f"nonnegative real part",
            unstable,
        )
    solution = scipy.linalg.solve_continuous_lyapunov(matrix, -rhs)
    result: DenseMatrix = 0.5 * (solution + solution.T)
    return result
