"""Sparse approximate inverse preconditioners.

``spai_build`` computes a right approximate inverse P of K by minimizing
||I - K P||_F one column at a time. ``spai_update`` computes a factor Q for a
shifted operator by minimizing ||K_old - K_new Q||_F, so that Q P_old serves as
a preconditioner for K_new. Factors are composed into a
``PreconditionerChain`` which is applied without forming the product.
"""
import enum
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
import scipy.sparse
from scipy.sparse.linalg import LinearOperator

from airga.linalg import (
    AirgaError,
    DimensionError,
    NumericalError,
    SparseMatrix,
    Vector,
    as_sparse,
    frob_norm,
    spmv,
    trace_inner,
)
from airga.models.matrix_market import read_mm, write_mm

logger = logging.getLogger(__name__)

DEFAULT_TOL = 0.01
DEFAULT_MAX_COL_ITERS = 50
DEFAULT_QUALITY_SAMPLES = 50


class StagnationError(AirgaError):
    def __init__(self, message: str, column: int) -> None:
        super().__init__(message)
        self.column = column


class FactorKind(enum.Enum):
    BASE = "base"
    UPDATE = "update"


class SpaiMode(enum.Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class SpaiOptions:
    tol: float = DEFAULT_TOL
    max_col_iters: int = DEFAULT_MAX_COL_ITERS
    mode: SpaiMode = SpaiMode.SEQUENTIAL
    workers: int = 1
    strict: bool = False

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValueError(f"SPAI tol must be positive, got {self.tol}")
        if self.max_col_iters < 0:
            raise ValueError(f"max_col_iters must be >= 0, got {self.max_col_iters}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True, eq=False)
class SpaiFactor:
    """A computed P (base) or Q (update) factor.

    ``target_frob_residual[j]`` is the final ||target_j - K p_j|| of column j,
    where the target is e_j for base factors and column j of K_old for
    updates.
    """

    matrix: SparseMatrix
    target_frob_residual: Vector
    build_seconds: float
    kind: FactorKind
    alpha: float
    inner_iterations: npt.NDArray[np.int64] = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64)
    )

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def max_residual(self) -> float:
        if self.target_frob_residual.size == 0:
            return 0.0
        return float(np.max(self.target_frob_residual))

    @property
    def total_inner_iterations(self) -> int:
        return int(np.sum(self.inner_iterations))

    def columns_above(self, tol: float) -> int:
        return int(np.sum(self.target_frob_residual > tol))


@dataclass(frozen=True, eq=False)
class PreconditionerChain:
    """Factors in written order [Q^(z), ..., Q^(2), P^(1)].

    Applying the chain multiplies by the last factor first.
    """

    dim: int
    factors: Tuple[SpaiFactor, ...] = ()

    def __post_init__(self) -> None:
        for factor in self.factors:
            if factor.matrix.shape != (self.dim, self.dim):
                raise DimensionError(
                    f"Factor of shape {factor.matrix.shape} does not fit a "
                    f"chain of dimension {self.dim}"
                )

    @classmethod
    def of(cls, factor: SpaiFactor) -> "PreconditionerChain":
        return cls(factor.dim, (factor,))

    def prepend(self, factor: SpaiFactor) -> "PreconditionerChain":
        return PreconditionerChain(self.dim, (factor,) + self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def apply(self, v: npt.ArrayLike) -> Vector:
        return chain_apply(self, v)

    def as_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.apply, dtype=np.float64)


def chain_apply(chain: PreconditionerChain, v: npt.ArrayLike) -> Vector:
    """Applies ``chain`` to ``v``, rightmost factor first."""
    result = np.array(v, dtype=np.float64).ravel()
    if result.shape[0] != chain.dim:
        raise DimensionError(
            f"Vector of length {result.shape[0]} does not fit a chain of "
            f"dimension {chain.dim}"
        )
    for factor in reversed(chain.factors):
        result = spmv(factor.matrix, result)
    return result


def chain_quality(
    chain: PreconditionerChain,
    k: SparseMatrix,
    samples: int = DEFAULT_QUALITY_SAMPLES,
    seed: int = 42,
) -> float:
    """Stochastic estimate of ||I - K P_chain||_F.

    Uses ``samples`` unit-norm Gaussian sample vectors g and returns
    sqrt(n / samples * sum ||(I - K P_chain) g||^2).
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    n = chain.dim
    if k.shape != (n, n):
        raise DimensionError(f"Operator {k.shape} does not match chain dimension {n}")
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(samples):
        sample = rng.standard_normal(n)
        sample /= np.linalg.norm(sample)
        residual = sample - spmv(k, chain_apply(chain, sample))
        total += float(residual @ residual)
    return float(np.sqrt(n / samples * total))


def build_alpha(k: SparseMatrix) -> float:
    """trace(K) / trace(K K^T)."""
    denominator = trace_inner(k, k)
    if denominator == 0.0:
        raise NumericalError("Cannot build a SPAI factor for a zero matrix")
    return float(k.diagonal().sum()) / denominator


def update_alpha(k_old: SparseMatrix, k_new: SparseMatrix) -> float:
    """1/2 trace(K_old^T K_new + K_new^T K_old) / trace(K_new^T K_new)."""
    denominator = trace_inner(k_new, k_new)
    if denominator == 0.0:
        raise NumericalError("Cannot build a SPAI update for a zero matrix")
    return 0.5 * (trace_inner(k_old, k_new) + trace_inner(k_new, k_old)) / denominator


class _ColumnMinimizer:
    """Per-column minimal residual iteration shared by build and update."""

    def __init__(
        self,
        k: SparseMatrix,
        target: Callable[[int], Vector],
        alpha: float,
        tol: float,
        max_col_iters: int,
        frozen: bool,
        strict: bool,
    ) -> None:
        self.k = k
        self.k_csc = k.tocsc()
        self.target = target
        self.alpha = alpha
        self.tol = tol
        self.max_col_iters = max_col_iters
        self.frozen = frozen
        self.strict = strict
        self.n = int(k.shape[0])
        # refined columns stored as p_j - alpha e_j
        self.delta: Dict[int, Tuple[npt.NDArray[np.int64], Vector]] = {}

    def k_column(self, j: int) -> Vector:
        column = np.zeros(self.n)
        start, stop = self.k_csc.indptr[j], self.k_csc.indptr[j + 1]
        column[self.k_csc.indices[start:stop]] = self.k_csc.data[start:stop]
        return column

    def current_p(self, r: Vector, j: int) -> Vector:
        d = self.alpha * r
        if self.frozen:
            return d
        for k in np.flatnonzero(r[:j]):
            refined = self.delta.get(int(k))
            if refined is not None:
                indices, values = refined
                d[indices] += r[k] * values
        return d

    def solve(self, j: int) -> Tuple[Vector, float, int]:
        p = np.zeros(self.n)
        p[j] = self.alpha
        r = self.target(j) - self.alpha * self.k_column(j)
        norm = float(np.linalg.norm(r))
        iterations = 0
        while norm > self.tol:
            if iterations >= self.max_col_iters:
                self.stagnate(
                    f"Column {j} did not reach tol {self.tol:g} in "
                    f"{self.max_col_iters} iterations (residual {norm:.3e})",
                    j,
                )
                break
            d = self.current_p(r, j)
            w = spmv(self.k, d)
            ww = float(w @ w)
            if ww == 0.0:
                self.stagnate(
                    f"Column {j} stagnated: search direction maps to zero "
                    f"(residual {norm:.3e})",
                    j,
                )
                break
            step = float(r @ w) / ww
            p += step * d
            r -= step * w
            iterations += 1
            norm = float(np.linalg.norm(r))
            if not np.isfinite(norm):
                raise NumericalError(f"Nonfinite residual in SPAI column {j}")
        logger.debug(f"SPAI column {j}: {iterations} iteration(s), residual {norm:.3e}")
        return p, norm, iterations

    def stagnate(self, message: str, j: int) -> None:
        # minimal residual steps never grow the residual, so the last iterate
        # is the best column found
        if self.strict:
            raise StagnationError(message, j)
        logger.debug(f"{message}; keeping the best column")

    def record(self, j: int, p: Vector) -> None:
        delta = p.copy()
        delta[j] -= self.alpha
        indices = np.flatnonzero(delta)
        if indices.size:
            self.delta[j] = (indices, delta[indices])

    def run(self, workers: int) -> Tuple[SparseMatrix, Vector, npt.NDArray[np.int64]]:
        columns: List[Tuple[Vector, float, int]]
        if self.frozen and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                columns = list(pool.map(self.solve, range(self.n)))
            for j, (p, _, _) in enumerate(columns):
                self.record(j, p)
        else:
            columns = []
            for j in range(self.n):
                result = self.solve(j)
                self.record(j, result[0])
                columns.append(result)
        residuals = np.array([norm for _, norm, _ in columns])
        missed = int(np.sum(residuals > self.tol))
        if missed:
            logger.warning(
                f"{missed} of {self.n} SPAI column(s) kept above tol {self.tol:g} "
                f"(largest residual {float(np.max(residuals)):.3e})"
            )
        return (
            self.assemble(),
            residuals,
            np.array([count for _, _, count in columns], dtype=np.int64),
        )

    def assemble(self) -> SparseMatrix:
        rows: List[npt.NDArray[np.int64]] = []
        cols: List[npt.NDArray[np.int64]] = []
        vals: List[Vector] = []
        for j, (indices, values) in self.delta.items():
            rows.append(indices)
            cols.append(np.full(indices.shape, j))
            vals.append(values)
        delta = scipy.sparse.csc_matrix((self.n, self.n))
        if rows:
            delta = scipy.sparse.csc_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.n, self.n),
            )
        identity = scipy.sparse.identity(self.n, format="csc")
        return as_sparse(self.alpha * identity + delta)


def _check_square(k: SparseMatrix) -> None:
    if k.shape[0] != k.shape[1]:
        raise DimensionError(f"SPAI needs a square matrix, got {k.shape}")
    if not np.all(np.isfinite(k.data)):
        raise NumericalError("SPAI input contains nonfinite values")


def spai_build(
    k: SparseMatrix,
    tol: float = DEFAULT_TOL,
    max_col_iters: int = DEFAULT_MAX_COL_ITERS,
    mode: SpaiMode = SpaiMode.SEQUENTIAL,
    workers: int = 1,
    strict: bool = False,
) -> SpaiFactor:
    """Builds a right approximate inverse P of ``k``.

    Starts from P = alpha I with alpha = trace(K) / trace(K K^T) and refines each
    column by minimal residual steps until ||e_j - K p_j|| <= tol. A column that
    cannot reach ``tol`` keeps its last iterate and its residual is reported in
    ``target_frob_residual``.

    Args:
        k (SparseMatrix): Square operator.
        tol (float): Per-column residual target.
        max_col_iters (int): Step limit per column.
        mode (SpaiMode): SEQUENTIAL uses the partially refined P for the
            search direction, PARALLEL freezes it at alpha I.
        workers (int): Threads used in PARALLEL mode.
        strict (bool): Raise instead of keeping columns above ``tol``.

    Raises:
        StagnationError: With ``strict``, a column cannot reach ``tol``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    k = as_sparse(k)
    _check_square(k)
    start = time.perf_counter()
    alpha = build_alpha(k)
    n = int(k.shape[0])

    def unit(j: int) -> Vector:
        e = np.zeros(n)
        e[j] = 1.0
        return e

    minimizer = _ColumnMinimizer(
        k,
        unit,
        alpha,
        tol,
        max_col_iters,
        frozen=mode is SpaiMode.PARALLEL,
        strict=strict,
    )
    matrix, residuals, iterations = minimizer.run(workers)
    elapsed = time.perf_counter() - start
    logger.debug(
        f"SPAI build n={n}: alpha={alpha:.6g}, {int(iterations.sum())} inner "
        f"iteration(s), {elapsed:.3f}s"
    )
    return SpaiFactor(matrix, residuals, elapsed, FactorKind.BASE, alpha, iterations)


def spai_update(
    k_old: SparseMatrix,
    k_new: SparseMatrix,
    tol: float = DEFAULT_TOL,
    max_col_iters: int = DEFAULT_MAX_COL_ITERS,
    mode: SpaiMode = SpaiMode.SEQUENTIAL,
    workers: int = 1,
    strict: bool = False,
) -> SpaiFactor:
    """Builds Q minimizing ||K_old - K_new Q||_F column by column.

    Starts from Q = alpha I with alpha the scalar minimizer of
    ||K_old - alpha K_new||_F. With ``k_new == k_old`` the result is exactly the
    identity after zero inner iterations. Columns above ``tol`` are handled as
    in ``spai_build``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    k_old = as_sparse(k_old)
    k_new = as_sparse(k_new)
    if k_old.shape != k_new.shape:
        raise DimensionError(f"Shape mismatch: {k_old.shape} vs {k_new.shape}")
    _check_square(k_new)
    start = time.perf_counter()
    alpha = update_alpha(k_old, k_new)
    old_csc = k_old.tocsc()
    n = int(k_new.shape[0])

    def old_column(j: int) -> Vector:
        column = np.zeros(n)
        lo, hi = old_csc.indptr[j], old_csc.indptr[j + 1]
        column[old_csc.indices[lo:hi]] = old_csc.data[lo:hi]
        return column

    minimizer = _ColumnMinimizer(
        k_new,
        old_column,
        alpha,
        tol,
        max_col_iters,
        frozen=mode is SpaiMode.PARALLEL,
        strict=strict,
    )
    matrix, residuals, iterations = minimizer.run(workers)
    elapsed = time.perf_counter() - start
    logger.debug(
        f"SPAI update n={n}: alpha={alpha:.6g}, {int(iterations.sum())} inner "
        f"iteration(s), {elapsed:.3f}s"
    )
    return SpaiFactor(matrix, residuals, elapsed, FactorKind.UPDATE, alpha, iterations)


def build_with(options: SpaiOptions, k: SparseMatrix) -> SpaiFactor:
    return spai_build(
        k,
        options.tol,
        options.max_col_iters,
        options.mode,
        options.workers,
        options.strict,
    )


def update_with(
    options: SpaiOptions, k_old: SparseMatrix, k_new: SparseMatrix
) -> SpaiFactor:
    return spai_update(
        k_old,
        k_new,
        options.tol,
        options.max_col_iters,
        options.mode,
        options.workers,
        options.strict,
    )


def identity_distance(k: SparseMatrix) -> float:
    """||I - K||_F."""
    return frob_norm(as_sparse(scipy.sparse.identity(k.shape[0], format="csr") - k))


def export_factor(factor: SpaiFactor, path: Union[str, Path]) -> None:
    write_mm(path, factor.matrix)


def import_factor(
    path: Union[str, Path], kind: FactorKind = FactorKind.BASE
) -> SpaiFactor:
    """Reads a factor written by ``export_factor``.

    Build statistics are not stored in the file; residuals and alpha are NaN.
    """
    matrix = read_mm(path)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"Factor in {path} is not square: {matrix.shape}")
    n = int(matrix.shape[0])
    return SpaiFactor(matrix, np.full(n, np.nan), 0.0, kind, float("nan"))


def export_chain(chain: PreconditionerChain, directory: Union[str, Path]) -> List[Path]:
    """Writes each factor of ``chain`` as ``factor-<position>-<kind>.mtx``."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    paths = []
    for position, factor in enumerate(chain.factors):
        path = target / f"factor-{position}-{factor.kind.value}.mtx"
        export_factor(factor, path)
        paths.append(path)
    return paths


def import_chain(paths: Sequence[Union[str, Path]]) -> PreconditionerChain:
    factors = []
    for path in paths:
        is_update = Path(path).stem.endswith("update")
        kind = FactorKind.UPDATE if is_update else FactorKind.BASE
        factors.append(import_factor(path, kind))
    if not factors:
        raise ValueError("Cannot import an empty chain")
    return PreconditionerChain(factors[0].dim, tuple(factors))

