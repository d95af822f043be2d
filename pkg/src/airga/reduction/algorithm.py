"""The AIRGA outer/inner iteration."""
import logging
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from airga.linalg import AirgaError, DenseMatrix, orthonormalize
from airga.reduction.config import AirgaConfig
from airga.reduction.moments import (
    MomentBlock,
    PointSolution,
    PointSolver,
    SolveStrategy,
    arnoldi_deflate,
    moment_error_estimates,
    next_moment,
    project_reduce,
    select_point,
    zeroth_moments,
)
from airga.reduction.norms import H2Result, relative_h2_change
from airga.reduction.points import ExpansionPointSet, refresh_points
from airga.reduction.system import OrthonormalBasis, ReducedSystem, SecondOrderSystem
from airga.reduction.trace import (
    IterationRecord,
    LedgerEntry,
    RunLedger,
    RunTrace,
    SolveRecord,
)

logger = logging.getLogger(__name__)


class ReductionError(AirgaError):
    def __init__(
        self, message: str, outer: int, inner: Optional[int], point: Optional[int]
    ) -> None:
        super().__init__(message)
        self.outer = outer
        self.inner = inner
        self.point = point


def _context(outer: int, inner: Optional[int], point: Optional[int]) -> str:
    parts = [f"outer iteration {outer}"]
    if inner is not None:
        parts.append(f"inner step {inner}")
    if point is not None:
        parts.append(f"point {point}")
    return ", ".join(parts)


def assemble_basis(blocks: Sequence[DenseMatrix], r_max: int) -> OrthonormalBasis:
    """Orthonormalizes [V_1, ..., V_J] restricted to its first ``r_max`` columns."""
    stacked = np.hstack(list(blocks))[:, :r_max]
    return OrthonormalBasis(list(blocks), orthonormalize(stacked))


def intermediate_basis(blocks: Sequence[MomentBlock]) -> Optional[OrthonormalBasis]:
    """Orthonormal basis of the normalized nonzero current blocks."""
    normalized = []
    for block in blocks:
        norm = float(np.linalg.norm(block.data))
        if norm > 0.0:
            normalized.append(block.data / norm)
    if not normalized:
        return None
    assembled = orthonormalize(np.hstack(normalized))
    if assembled.shape[1] == 0:
        return None
    return OrthonormalBasis(normalized, assembled)


class _OuterIteration:
    """Moment solves, deflation and basis assembly of one outer iteration."""

    def __init__(
        self,
        system: SecondOrderSystem,
        cfg: AirgaConfig,
        trace: RunTrace,
        outer: int,
        solvers: List[PointSolver],
    ) -> None:
        self.system = system
        self.cfg = cfg
        self.trace = trace
        self.outer = outer
        self.solvers = solvers
        self.basis_blocks: List[DenseMatrix] = []
        self.ledger = RunLedger(outer)
        self.blocks: List[MomentBlock] = []
        self.latest: List[PointSolution] = []

    def record_solve(
        self, inner: int, index: int, order: int, solution: PointSolution
    ) -> None:
        self.trace.solves.append(
            SolveRecord(
                outer=self.outer,
                inner=inner,
                point_index=index,
                point=self.solvers[index].point,
                order=order,
                rhs_columns=solution.raw.shape[1],
                cg_iterations=solution.cg_iterations,
                converged=solution.converged,
                solve_seconds=solution.solve_seconds,
            )
        )

    def select(self, inner: int) -> Optional[int]:
        """Appends V_j from the block with the largest moment error."""
        errors = moment_error_estimates(self.blocks)
        t = select_point(errors)
        if errors[t] == 0.0:
            return None
        self.basis_blocks.append(self.blocks[t].data / errors[t])
        solution = self.latest[t]
        if solution.residual is not None and solution.preconditioned is not None:
            self.ledger.entries.append(
                LedgerEntry(
                    order=len(self.basis_blocks) - 1,
                    point_index=t,
                    point=self.solvers[t].point,
                    raw=solution.raw,
                    residual=solution.residual,
                    preconditioned=solution.preconditioned,
                    rhs_norms=solution.rhs_norms,
                )
            )
        logger.debug(
            f"Outer {self.outer}, inner {inner}: selected point {t} "
            f"(s={self.solvers[t].point:.6g}, error {errors[t]:.3e})"
        )
        return t

    def run(self, points: ExpansionPointSet) -> Tuple[OrthonormalBasis, int]:
        outer = self.outer
        try:
            self.blocks, self.latest = zeroth_moments(self.system, points, self.solvers)
        except AirgaError as e:
            raise ReductionError(
                f"Zeroth moments failed at {_context(outer, 0, None)}: {e}",
                outer,
                0,
                None,
            ) from e
        for index, solution in enumerate(self.latest):
            self.record_solve(0, index, 0, solution)

        limit = self.cfg.inner_limit(self.system.m)
        previous_intermediate: Optional[ReducedSystem] = None
        j = 1
        while j <= limit:
            t = self.select(j)
            if t is None:
                logger.info(
                    f"Outer {outer}: all moment directions exhausted at step {j}"
                )
                break
            try:
                block, solution = next_moment(
                    self.system, self.solvers[t], self.basis_blocks[-1], j
                )
            except AirgaError as e:
                raise ReductionError(
                    f"Moment solve failed at {_context(outer, j, t)}: {e}", outer, j, t
                ) from e
            self.latest[t] = solution
            self.record_solve(j, t, j, solution)
            carried = [
                block if i == t else self.blocks[i] for i in range(len(self.blocks))
            ]
            self.blocks = [arnoldi_deflate(b, self.basis_blocks)[0] for b in carried]

            basis = intermediate_basis(self.blocks)
            converged = False
            if basis is not None:
                intermediate = project_reduce(self.system, basis)
                if previous_intermediate is not None:
                    change = relative_h2_change(
                        intermediate, previous_intermediate, self.cfg.h2_method
                    )
                    converged = change.value <= self.cfg.inner_tol
                previous_intermediate = intermediate
            j += 1
            if converged:
                break

        t = self.select(j)
        if t is None and not self.basis_blocks:
            raise ReductionError(
                f"No moment directions at {_context(outer, j, None)}", outer, j, None
            )
        return assemble_basis(self.basis_blocks, self.cfg.r_max), len(self.basis_blocks)


def airga_run(
    system: SecondOrderSystem,
    cfg: AirgaConfig,
    strategy: Optional[SolveStrategy] = None,
) -> Tuple[ReducedSystem, RunTrace]:
    """Reduces ``system`` with AIRGA.

    Every outer iteration rebuilds the basis from the full system at the
    current expansion points, projects, and refreshes the points from the
    reduced quadratic eigenvalues. The loop stops once the relative H2 change
    between consecutive reduced systems is at most ``cfg.outer_tol`` or after
    ``cfg.max_outer`` iterations.

    Pass ``strategy`` to keep access to the preconditioner chains afterwards.

    Raises:
        ReductionError: Any lower-level failure, annotated with the outer
            iteration, inner step and point index.
    """
    cfg.validate_for(system.m)
    strategy = strategy or SolveStrategy(cfg)
    trace = RunTrace(solver=cfg.solver.value, seed=cfg.seed)
    points = cfg.initial_points
    previous: Optional[ReducedSystem] = None
    reduced: Optional[ReducedSystem] = None

    for outer in range(1, cfg.max_outer + 1):
        try:
            solvers, records = strategy.prepare(system, points, outer)
        except AirgaError as e:
            raise ReductionError(
                f"Preconditioner setup failed at {_context(outer, None, None)}: {e}",
                outer,
                None,
                None,
            ) from e
        trace.preconditioners.extend(records)

        iteration = _OuterIteration(system, cfg, trace, outer, solvers)
        basis, inner_steps = iteration.run(points)
        start = time.perf_counter()
        reduced = project_reduce(system, basis, points.points)
        projection_seconds = time.perf_counter() - start
        if cfg.solver.iterative:
            iteration.ledger.basis_blocks = list(iteration.basis_blocks)
            trace.ledger = iteration.ledger

        change = H2Result(float("nan"), cfg.h2_method)
        if previous is not None:
            try:
                change = relative_h2_change(reduced, previous, cfg.h2_method)
            except AirgaError as e:
                raise ReductionError(
                    f"H2 comparison failed at {_context(outer, None, None)}: {e}",
                    outer,
                    None,
                    None,
                ) from e
        errors = moment_error_estimates(iteration.blocks)
        trace.iterations.append(
            IterationRecord(
                outer=outer,
                r=reduced.r,
                inner_steps=inner_steps,
                h2_change=change.value,
                h2_method=change.method.value,
                points=tuple(points.points),
                moment_errors=tuple(float(e) for e in errors),
                projection_seconds=projection_seconds,
                points_padded=points.padded,
            )
        )
        logger.info(
            f"Outer {outer}: r={reduced.r}, points [{points.describe()}], "
            f"H2 change {change.value:.3e}"
        )
        if previous is not None and change.value <= cfg.outer_tol:
            trace.converged = True
            break
        previous = reduced
        if outer < cfg.max_outer:
            try:
                points = refresh_points(reduced, len(cfg.initial_points), points)
            except AirgaError as e:
                raise ReductionError(
                    "Expansion point refresh failed at "
                    f"{_context(outer, None, None)}: {e}",
                    outer,
                    None,
                    None,
                ) from e

    if not trace.converged:
        logger.warning(
            f"AIRGA stopped after {cfg.max_outer} outer iteration(s) without converging"
        )
    assert reduced is not None
    return reduced, trace
