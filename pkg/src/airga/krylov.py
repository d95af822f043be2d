"""Right-preconditioned conjugate gradients with residual capture."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Union

import numpy as np
import numpy.typing as npt
import scipy.sparse
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from airga.linalg import AirgaError, DenseMatrix, DimensionError, NumericalError, Vector

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
BREAKDOWN_TOL = 1e-30
MAXIT_PER_UNKNOWN = 10

OperatorLike = Union[LinearOperator, scipy.sparse.spmatrix, npt.NDArray[np.float64]]


class BreakdownError(AirgaError):
    def __init__(
        self, message: str, iteration: int, column: Optional[int] = None
    ) -> None:
        super().__init__(message)
        self.iteration = iteration
        self.column = column


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a single pcg_solve call.

    ``residual`` is ``b - A @ solution`` recomputed from the returned solution,
    ``recurrence_residual`` is the residual carried by the CG recurrence and
    ``preconditioned_solution`` is the iterate x~ with ``solution = P(x~)``.
    """

    solution: Vector
    residual: Vector
    recurrence_residual: Vector
    preconditioned_solution: Vector
    iterations: int
    converged: bool
    relres_history: Vector


class BlockSolveResult(NamedTuple):
    solution: DenseMatrix
    residual: DenseMatrix
    preconditioned: DenseMatrix
    reports: List[SolveReport]

    @property
    def iterations(self) -> int:
        return sum(report.iterations for report in self.reports)

    @property
    def converged(self) -> bool:
        return all(report.converged for report in self.reports)


def as_operator(a: OperatorLike) -> LinearOperator:
    return aslinearoperator(a)


def identity_operator(n: int) -> LinearOperator:
    return LinearOperator(
        (n, n), matvec=lambda v: np.array(v, dtype=np.float64).ravel(), dtype=np.float64
    )


def default_maxit(n: int) -> int:
    return MAXIT_PER_UNKNOWN * n


def pcg_solve(
    a: OperatorLike,
    p: Optional[OperatorLike],
    b: npt.ArrayLike,
    rtol: float = DEFAULT_RTOL,
    maxit: Optional[int] = None,
) -> SolveReport:
    """Solves ``a x = b`` with CG on the right-preconditioned operator ``a p``.

    CG starts from x~ = 0 on ``a p`` and the returned solution is ``p x~``.
    Exhausting ``maxit`` is reported through ``converged=False``.

    Raises:
        BreakdownError: The direction curvature d^T (a p) d falls to
            1e-30 ||d||^2 or below.
    """
    op = as_operator(a)
    rhs = np.asarray(b, dtype=np.float64).ravel()
    n = op.shape[0]
    precond = identity_operator(n) if p is None else as_operator(p)
    if op.shape != (n, n) or precond.shape != (n, n) or rhs.shape[0] != n:
        raise DimensionError(
            f"pcg_solve dimensions disagree: A {op.shape}, P {precond.shape}, "
            f"b ({rhs.shape[0]},)"
        )
    if rtol <= 0:
        raise ValueError(f"rtol must be positive, got {rtol}")
    if not np.all(np.isfinite(rhs)):
        raise NumericalError("Right-hand side contains nonfinite values")
    limit = default_maxit(n) if maxit is None else maxit

    b_norm = float(np.linalg.norm(rhs))
    if b_norm == 0.0:
        zero = np.zeros(n)
        return SolveReport(
            zero, zero.copy(), zero.copy(), zero.copy(), 0, True, np.zeros(1)
        )

    x_tilde = np.zeros(n)
    r = rhs.copy()
    d = r.copy()
    rr = float(r @ r)
    history = [1.0]
    converged = False
    iteration = 0
    while iteration < limit:
        iteration += 1
        w = op.matvec(precond.matvec(d)).ravel()
        curvature = float(d @ w)
        if not np.isfinite(curvature):
            raise NumericalError(f"Nonfinite curvature at CG iteration {iteration}")
        if curvature <= BREAKDOWN_TOL * float(d @ d):
            raise BreakdownError(
                f"CG breakdown at iteration {iteration}: curvature {curvature:.3e}",
                iteration,
            )
        step = rr / curvature
        x_tilde += step * d
        r -= step * w
        rr_next = float(r @ r)
        relres = float(np.sqrt(rr_next)) / b_norm
        history.append(relres)
        if relres <= rtol:
            true_residual = rhs - op.matvec(precond.matvec(x_tilde)).ravel()
            if float(np.linalg.norm(true_residual)) <= rtol * b_norm:
                converged = True
                break
            # residual replacement; restart the recurrence from the true residual
            r = true_residual
            d = r.copy()
            rr = float(r @ r)
            continue
        d = r + (rr_next / rr) * d
        rr = rr_next

    solution = precond.matvec(x_tilde).ravel()
    residual = rhs - op.matvec(solution).ravel()
    if not converged:
        logger.warning(
            f"CG did not converge in {iteration} iterations "
            f"(relative residual {history[-1]:.3e}, rtol {rtol:.1e})"
        )
    return SolveReport(
        solution=solution,
        residual=residual,
        recurrence_residual=r,
        preconditioned_solution=x_tilde,
        iterations=iteration,
        converged=converged,
        relres_history=np.array(history),
    )


def block_solve(
    a: OperatorLike,
    p: Optional[OperatorLike],
    b: DenseMatrix,
    rtol: float = DEFAULT_RTOL,
    maxit: Optional[int] = None,
    workers: int = 1,
) -> BlockSolveResult:
    """Runs pcg_solve on every column of ``b``.

    The residual block collects the recurrence residuals of the columns. With
    ``workers > 1`` columns are solved on a thread pool; every column is an
    independent call so the result matches sequential execution.
    """
    rhs = np.atleast_2d(np.asarray(b, dtype=np.float64))
    op = as_operator(a)
    if rhs.shape[0] != op.shape[0]:
        raise DimensionError(
            f"Block has {rhs.shape[0]} rows but the operator has "
            f"dimension {op.shape[0]}"
        )

    def solve_column(column: int) -> SolveReport:
        try:
            return pcg_solve(op, p, rhs[:, column], rtol=rtol, maxit=maxit)
        except BreakdownError as e:
            raise BreakdownError(
                f"Column {column}: {e}", e.iteration, column=column
            ) from e

    columns = range(rhs.shape[1])
    if workers > 1 and rhs.shape[1] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(solve_column, columns))
    else:
        reports = [solve_column(column) for column in columns]

    n = rhs.shape[0]

    def stack(vectors: List[Vector]) -> DenseMatrix:
        if not vectors:
            return np.zeros((n, 0))
        return np.column_stack(vectors)

    return BlockSolveResult(
        solution=stack([report.solution for report in reports]),
        residual=stack([report.recurrence_residual for report in reports]),
        preconditioned=stack([report.preconditioned_solution for report in reports]),
        reports=reports,
    )
