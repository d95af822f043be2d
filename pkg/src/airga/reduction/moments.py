"""Moment solves, global Arnoldi deflation and Galerkin projection."""
import abc
import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.sparse.linalg

from airga import spai
from airga.krylov import as_operator, block_solve
from airga.linalg import (
    RANK_TOL,
    DenseMatrix,
    DimensionError,
    SingularMatrixError,
    SparseMatrix,
    Vector,
    frob_norm,
    thin_qr,
    trace_inner,
)
from airga.reduction.config import AirgaConfig, SolverKind
from airga.reduction.constants import EXHAUSTED_BLOCK_TOL
from airga.reduction.points import ExpansionPointSet
from airga.reduction.system import OrthonormalBasis, ReducedSystem, SecondOrderSystem
from airga.reduction.trace import PreconditionerRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MomentBlock:
    point_index: int
    order: int
    data: DenseMatrix


@dataclass(frozen=True, eq=False)
class PointSolution:
    """Result of solving K(s) X = B for one expansion point.

    ``residual`` is eta = K(s) X - B from the solver recurrence and
    ``preconditioned`` the iterate X~ with X = P X~; both are None for direct
    solves.
    """

    raw: DenseMatrix
    residual: Optional[DenseMatrix]
    preconditioned: Optional[DenseMatrix]
    rhs_norms: Vector
    cg_iterations: int
    converged: bool
    solve_seconds: float


class PointSolver(abc.ABC):
    """Solves with the shifted operator of one expansion point."""

    def __init__(self, point: float, point_index: int, operator: SparseMatrix) -> None:
        self.point = point
        self.point_index = point_index
        self.operator = operator

    @abc.abstractmethod
    def solve(self, rhs: DenseMatrix) -> PointSolution:
        pass


class DirectSolver(PointSolver):
    def __init__(self, point: float, point_index: int, operator: SparseMatrix) -> None:
        super().__init__(point, point_index, operator)
        try:
            self.lu = scipy.sparse.linalg.splu(operator.tocsc())
        except RuntimeError as e:
            raise SingularMatrixError(
                f"Shifted operator at s={point} is singular: {e}", -1
            ) from e

    def solve(self, rhs: DenseMatrix) -> PointSolution:
        start = time.perf_counter()
        raw = np.asarray(self.lu.solve(np.asarray(rhs, dtype=np.float64)))
        raw = raw.reshape(rhs.shape)
        return PointSolution(
            raw=raw,
            residual=None,
            preconditioned=None,
            rhs_norms=np.linalg.norm(rhs, axis=0),
            cg_iterations=0,
            converged=True,
            solve_seconds=time.perf_counter() - start,
        )


class CgSolver(PointSolver):
    def __init__(
        self,
        point: float,
        point_index: int,
        operator: SparseMatrix,
        chain: Optional[spai.PreconditionerChain],
        rtol: float,
        maxit: Optional[int],
        workers: int,
    ) -> None:
        super().__init__(point, point_index, operator)
        self.chain = chain
        self.rtol = rtol
        self.maxit = maxit
        self.workers = workers

    def solve(self, rhs: DenseMatrix) -> PointSolution:
        start = time.perf_counter()
        precond = None if self.chain is None else self.chain.as_operator()
        result = block_solve(
            as_operator(self.operator),
            precond,
            rhs,
            rtol=self.rtol,
            maxit=self.maxit,
            workers=self.workers,
        )
        logger.debug(
            f"CG at s={self.point:.6g}: {result.iterations} iteration(s) over "
            f"{rhs.shape[1]} column(s)"
        )
        return PointSolution(
            raw=result.solution,
            residual=-result.residual,
            preconditioned=result.preconditioned,
            rhs_norms=np.linalg.norm(rhs, axis=0),
            cg_iterations=result.iterations,
            converged=result.converged,
            solve_seconds=time.perf_counter() - start,
        )


class SolveStrategy:
    """Builds the per-point solvers of every outer iteration.

    With the update solver, the chain of point i at outer iteration z >=
    ``update_start_iteration`` is [Q, chain of point i at z - 1] where Q maps
    K_i^(z-1) to K_i^(z).
    """

    def __init__(self, cfg: AirgaConfig) -> None:
        self.cfg = cfg
        self.previous: Dict[int, Tuple[SparseMatrix, spai.PreconditionerChain]] = {}

    def chains(self) -> Dict[int, spai.PreconditionerChain]:
        """The latest chain of every point index."""
        return {index: chain for index, (_, chain) in sorted(self.previous.items())}

    def prepare(
        self, system: SecondOrderSystem, points: ExpansionPointSet, outer: int
    ) -> Tuple[List[PointSolver], List[PreconditionerRecord]]:
        solvers: List[PointSolver] = []
        records: List[PreconditionerRecord] = []
        for index, point in enumerate(points):
            operator = system.shifted(point)
            if self.cfg.solver is SolverKind.DIRECT:
                solvers.append(DirectSolver(point, index, operator))
                continue
            chain = None
            if self.cfg.solver.preconditioned:
                chain, record = self._chain(operator, index, point, outer)
                records.append(record)
            solvers.append(
                CgSolver(
                    point,
                    index,
                    operator,
                    chain,
                    self.cfg.cg_rtol,
                    self.cfg.cg_maxit,
                    self.cfg.workers,
                )
            )
        return solvers, records

    def _chain(
        self, operator: SparseMatrix, index: int, point: float, outer: int
    ) -> Tuple[spai.PreconditionerChain, PreconditionerRecord]:
        options = self.cfg.spai_options
        previous = self.previous.get(index)
        use_update = (
            self.cfg.solver is SolverKind.CG_SPAI_UPDATE
            and outer >= self.cfg.update_start_iteration
            and previous is not None
        )
        shift_distance = float("nan")
        if use_update and previous is not None:
            old_operator, old_chain = previous
            factor = spai.update_with(options, old_operator, operator)
            chain = old_chain.prepend(factor)
            shift_distance = frob_norm(old_operator - operator)
        else:
            factor = spai.build_with(options, operator)
            chain = spai.PreconditionerChain.of(factor)
        self.previous[index] = (operator, chain)
        record = PreconditionerRecord(
            outer=outer,
            point_index=index,
            point=point,
            kind=factor.kind.value,
            chain_length=len(chain),
            alpha=factor.alpha,
            identity_distance=spai.identity_distance(operator),
            shift_distance=shift_distance,
            max_column_residual=factor.max_residual,
            columns_over_tol=factor.columns_above(options.tol),
            inner_iterations=factor.total_inner_iterations,
            build_seconds=factor.build_seconds,
        )
        logger.debug(
            f"Preconditioner for point {index} (s={point:.6g}) at outer {outer}: "
            f"{factor.kind.value}, chain length {len(chain)}, "
            f"{factor.build_seconds:.3f}s"
        )
        return chain, record


def zeroth_moments(
    system: SecondOrderSystem,
    points: ExpansionPointSet,
    solvers: Sequence[PointSolver],
) -> Tuple[List[MomentBlock], List[PointSolution]]:
    """Solves K(s_i) X = F for every point and keeps the Q factor of each block."""
    if len(points) != len(solvers):
        raise ValueError(f"{len(points)} point(s) but {len(solvers)} solver(s)")
    blocks = []
    solutions = []
    for index, solver in enumerate(solvers):
        solution = solver.solve(system.F)
        q, r, rank = thin_qr(solution.raw)
        if rank < q.shape[1]:
            logger.warning(
                f"Zeroth moment at s={points[index]:.6g} has rank {rank} "
                f"of {q.shape[1]}; dropping dependent columns"
            )
            dependent = np.abs(np.diag(r)) <= RANK_TOL * frob_norm(solution.raw)
            q = np.where(dependent[np.newaxis, :], 0.0, q)
        blocks.append(MomentBlock(index, 0, q))
        solutions.append(solution)
    return blocks, solutions


def next_moment(
    system: SecondOrderSystem, solver: PointSolver, vj: DenseMatrix, order: int
) -> Tuple[MomentBlock, PointSolution]:
    """Solves K(s) X = -M V_j for the point of ``solver``."""
    rhs = -np.asarray(system.M @ vj)
    solution = solver.solve(rhs)
    return MomentBlock(solver.point_index, order, solution.raw), solution


def arnoldi_deflate(
    block: MomentBlock, basis_blocks: Sequence[DenseMatrix]
) -> Tuple[MomentBlock, npt.NDArray[np.float64]]:
    """Removes the trace-inner-product components along ``basis_blocks``.

    Runs a modified Gram-Schmidt sweep followed by one reorthogonalization
    sweep; the returned gammas are the summed coefficients of both sweeps. A
    block reduced below 1e-12 of its incoming norm is returned as zero.
    """
    data = np.array(block.data, dtype=np.float64)
    gammas = np.zeros(len(basis_blocks))
    incoming = frob_norm(data)
    for _ in range(2):
        for t, v in enumerate(basis_blocks):
            if v.shape != data.shape:
                raise DimensionError(
                    f"Basis block {t} has shape {v.shape}, moment block {data.shape}"
                )
            gamma = trace_inner(v, data)
            data -= gamma * v
            gammas[t] += gamma
    if incoming > 0.0 and frob_norm(data) <= EXHAUSTED_BLOCK_TOL * incoming:
        data = np.zeros_like(data)
    return MomentBlock(block.point_index, block.order, data), gammas


def moment_error_estimates(blocks: Sequence[MomentBlock]) -> npt.NDArray[np.float64]:
    """Post-deflation Frobenius norm of every point's current block."""
    return np.array([frob_norm(block.data) for block in blocks])


def select_point(moment_errors: npt.ArrayLike) -> int:
    """Index of the largest moment error; the first one wins ties."""
    errors = np.asarray(moment_errors, dtype=np.float64)
    if errors.size == 0:
        raise ValueError("Cannot select a point from an empty error array")
    if not np.all(np.isfinite(errors)):
        raise ValueError(f"Moment errors must be finite: {errors}")
    return int(np.argmax(errors))


def project_reduce(
    system: SecondOrderSystem, basis: OrthonormalBasis, points: Sequence[float] = ()
) -> ReducedSystem:
    """Galerkin projection onto ``basis.assembled``."""
    v = basis.assembled

    def congruence(matrix: SparseMatrix) -> DenseMatrix:
        reduced = np.asarray(v.T @ (matrix @ v))
        if (matrix != matrix.T).nnz == 0:
            reduced = 0.5 * (reduced + reduced.T)
        return reduced

    return ReducedSystem(
        Mh=congruence(system.M),
        Dh=congruence(system.D),
        Kh=congruence(system.K),
        Fh=np.asarray(v.T @ system.F),
        Cph=np.asarray(system.Cp @ v),
        Cvh=np.asarray(system.Cv @ v),
        basis=basis,
        alpha=system.alpha,
        beta=system.beta,
        proportional=system.proportional,
        points=tuple(points),
    )
