"""Residual ledger, perturbation matrix Z and Galerkin orthogonality checks.

With inexact solves, every selected moment block X_j satisfies
K(s_j) X_j = B_j + eta_j. Attributing the error to K alone gives a perturbation
Z with Z X = -eta, where X and eta stack the selected blocks column-wise.
"""
import enum
import logging
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg

from airga.linalg import (
    RANK_TOL,
    AirgaError,
    DenseMatrix,
    DimensionError,
    frob_norm,
    thin_qr,
    trace_inner,
)
from airga.reduction.system import OrthonormalBasis
from airga.reduction.trace import RunLedger, RunTrace

logger = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 500
POWER_ITERATIONS = 30


class LedgerError(AirgaError):
    pass


class RankError(LedgerError):
    def __init__(self, message: str, columns: List[int]) -> None:
        super().__init__(message)
        self.columns = columns


class Construction(enum.Enum):
    MIN_NORM_PSEUDOINVERSE = "min_norm_pseudoinverse"
    GRAM_PSEUDOINVERSE = "gram_pseudoinverse"


@dataclass(frozen=True, eq=False)
class ResidualLedger:
    """Selected moment blocks and their solver residual blocks, orders 0..J-1."""

    moment_blocks: List[DenseMatrix]
    residual_blocks: List[DenseMatrix]
    selected_points: npt.NDArray[np.float64]
    preconditioned_blocks: List[DenseMatrix]
    basis_blocks: List[DenseMatrix]

    def __post_init__(self) -> None:
        lengths = {
            len(self.moment_blocks),
            len(self.residual_blocks),
            len(self.selected_points),
        }
        if len(lengths) != 1:
            raise LedgerError(
                f"Ledger lists differ in length: {len(self.moment_blocks)} moment, "
                f"{len(self.residual_blocks)} residual, "
                f"{len(self.selected_points)} points"
            )

    def __len__(self) -> int:
        return len(self.moment_blocks)

    @property
    def n(self) -> int:
        return int(self.moment_blocks[0].shape[0]) if self.moment_blocks else 0

    def stacked_moments(self) -> DenseMatrix:
        return np.hstack(self.moment_blocks)

    def stacked_residuals(self) -> DenseMatrix:
        return np.hstack(self.residual_blocks)


@dataclass(frozen=True, eq=False)
class PerturbationEstimate:
    Z: DenseMatrix
    z_norm: float
    construction: Construction

    def equation_residual(self, ledger: ResidualLedger) -> float:
        """||Z X + eta||_F."""
        return frob_norm(self.Z @ ledger.stacked_moments() + ledger.stacked_residuals())


@dataclass(frozen=True, eq=False)
class OrthogonalityReport:
    """trace(V_t^T eta_j) for every basis block t and ledger entry j, plus the
    per-entry inner products of eta_j with the raw and preconditioned iterates."""

    basis_matrix: DenseMatrix
    raw: npt.NDArray[np.float64]
    preconditioned: npt.NDArray[np.float64]
    residual_norms: npt.NDArray[np.float64]

    def subdiagonal(self) -> npt.NDArray[np.float64]:
        """The (j + 1, j) entries of the basis matrix."""
        return np.array(np.diagonal(self.basis_matrix, offset=-1))


def build_ledger(trace: Union[RunTrace, RunLedger]) -> ResidualLedger:
    """Extracts the selected-point blocks of the last outer iteration.

    Raises:
        LedgerError: The run used direct solves and recorded no residuals.
    """
    run_ledger = trace.ledger if isinstance(trace, RunTrace) else trace
    if run_ledger is None or not run_ledger.entries:
        raise LedgerError("no residual ledger: the run used direct solves")
    entries = sorted(run_ledger.entries, key=lambda entry: entry.order)
    return ResidualLedger(
        moment_blocks=[entry.raw for entry in entries],
        residual_blocks=[entry.residual for entry in entries],
        selected_points=np.array([entry.point for entry in entries]),
        preconditioned_blocks=[entry.preconditioned for entry in entries],
        basis_blocks=list(run_ledger.basis_blocks),
    )


def spectral_norm_estimate(matrix: DenseMatrix, seed: int = 42) -> float:
    """Largest singular value from power iteration on matrix^T matrix."""
    if not np.any(matrix):
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(matrix.shape[1])
    v /= np.linalg.norm(v)
    value = 0.0
    for _ in range(POWER_ITERATIONS):
        w = matrix.T @ (matrix @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        value = norm
    return float(np.sqrt(value))


def compute_Z(
    ledger: ResidualLedger,
    construction: Construction = Construction.MIN_NORM_PSEUDOINVERSE,
    max_dim: int = DEFAULT_MAX_DIM,
    seed: int = 42,
) -> PerturbationEstimate:
    """Forms Z with Z X = -eta.

    The minimum-norm construction is Z = -eta X^+ with X^+ = R^-1 Q^T from a thin
    QR of X. The alternative -eta X^T (X X^T)^+ uses the pseudoinverse of the
    rank-deficient n x n Gram matrix.

    Raises:
        LedgerError: The ledger is empty, n exceeds ``max_dim`` or mJ >= n.
        RankError: X does not have full column rank.
    """
    if len(ledger) == 0:
        raise LedgerError("Cannot form Z from an empty ledger")
    x = ledger.stacked_moments()
    eta = ledger.stacked_residuals()
    n, columns = x.shape
    if n > max_dim:
        raise LedgerError(f"Z is a dense {n}x{n} matrix; n exceeds the limit {max_dim}")
    if columns >= n:
        raise LedgerError(f"Z needs mJ < n, got mJ={columns}, n={n}")
    q, r, rank = thin_qr(x)
    if rank < columns:
        small = np.abs(np.diag(r)) <= RANK_TOL * frob_norm(x)
        deficient = [int(i) for i in np.flatnonzero(small)]
        raise RankError(
            f"Stacked moment matrix has rank {rank} of {columns}; dependent "
            f"column(s) {deficient}",
            deficient,
        )
    if construction is Construction.MIN_NORM_PSEUDOINVERSE:
        pseudo = scipy.linalg.solve_triangular(r, q.T)
        z = -eta @ pseudo
    else:
        z = -eta @ x.T @ np.linalg.pinv(x @ x.T)
    estimate = PerturbationEstimate(z, spectral_norm_estimate(z, seed), construction)
    logger.info(
        f"Z from {len(ledger)} ledger entries: ||Z||_2 ~ {estimate.z_norm:.3e}, "
        f"||Z X + eta||_F = {estimate.equation_residual(ledger):.3e}"
    )
    return estimate


def check_galerkin_orthogonality(
    basis: Union[OrthonormalBasis, Sequence[DenseMatrix]], ledger: ResidualLedger
) -> OrthogonalityReport:
    """Inner products of residual blocks with basis blocks and iterates.

    For plain CG started from zero, the recurrence residual of every column is
    orthogonal to its Krylov space, so ``raw`` is at roundoff level. With right
    preconditioning the orthogonality holds for the preconditioned iterate.
    """
    basis_blocks = basis.blocks if isinstance(basis, OrthonormalBasis) else list(basis)
    for block in basis_blocks:
        if ledger.n and block.shape[0] != ledger.n:
            raise DimensionError(
                f"Basis block has {block.shape[0]} rows, ledger blocks {ledger.n}"
            )
    matrix = np.zeros((len(basis_blocks), len(ledger)))
    for t, v in enumerate(basis_blocks):
        for j, eta in enumerate(ledger.residual_blocks):
            if v.shape == eta.shape:
                matrix[t, j] = trace_inner(v, eta)
    pairs = zip(ledger.moment_blocks, ledger.residual_blocks)
    raw = np.array([trace_inner(x, eta) for x, eta in pairs])
    preconditioned = np.array(
        [
            trace_inner(x, eta)
            for x, eta in zip(ledger.preconditioned_blocks, ledger.residual_blocks)
        ]
    )
    norms = np.array([frob_norm(eta) for eta in ledger.residual_blocks])
    return OrthogonalityReport(matrix, raw, preconditioned, norms)
