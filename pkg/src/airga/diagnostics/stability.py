"""Frequency-grid checks of the stability conditions for inexact AIRGA.

With K(s) = s^2 M + s D + K and a perturbation Z of K, the reduction is stable
when ||K(s)^-1||_Hinf ||Z|| < 1, and then

    ||H - H~||_H2 <= ||C(s) K(s)^-1||_H2 ||K(s)^-1 F||_Hinf ||Z||
                     / (1 - ||K(s)^-1||_Hinf ||Z||)

where C(s) = Cp + s Cv and H~ is the system with K replaced by K + Z. All
norms are approximated on a grid of frequencies omega, s = i omega.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.sparse
import scipy.sparse.linalg

from airga.linalg import AirgaError, DenseMatrix, as_sparse
from airga.reduction.system import SecondOrderSystem

from .ledger import DEFAULT_MAX_DIM, LedgerError, PerturbationEstimate

logger = logging.getLogger(__name__)

GRID_START = 1e-2
GRID_STOP = 1e4
GRID_POINTS = 200
REFINE_POINTS = 16
INVERSE_POWER_ITERATIONS = 50
INVERSE_POWER_TOL = 1e-10


class PreconditionError(AirgaError):
    pass


@dataclass(frozen=True)
class Theorem2Result:
    condition_value: float
    holds: bool
    hinf_factor: float
    z_norm: float
    peak_frequency: float


@dataclass(frozen=True)
class Theorem1Result:
    bound: float
    measured: float
    h2_factor: float
    input_hinf_factor: float
    hinf_factor: float

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound


def default_grid(
    start: float = GRID_START, stop: float = GRID_STOP, count: int = GRID_POINTS
) -> npt.NDArray[np.float64]:
    return np.logspace(np.log10(start), np.log10(stop), count)


def parse_grid(text: str) -> npt.NDArray[np.float64]:
    """Parses ``a:b:k`` into ``k`` log-spaced frequencies on [a, b]."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"Expected a:b:k, got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if start <= 0 or stop < start or count < 1:
        raise ValueError(f"Grid needs 0 < a <= b and k >= 1, got {text!r}")
    if count == 1:
        return np.array([start])
    return default_grid(start, stop, count)


class _Resolvent:
    """Sparse LU of K(i omega) = -omega^2 M + i omega D + K."""

    def __init__(
        self,
        system: SecondOrderSystem,
        omega: float,
        extra: Optional[DenseMatrix] = None,
    ) -> None:
        s = 1j * omega
        operator = (s * s * system.M + s * system.D + system.K).astype(np.complex128)
        if extra is not None:
            operator = operator + scipy.sparse.csr_matrix(extra.astype(np.complex128))
        self.lu = scipy.sparse.linalg.splu(operator.tocsc())

    def solve(
        self, rhs: npt.ArrayLike, adjoint: bool = False
    ) -> npt.NDArray[np.complex128]:
        values = np.asarray(rhs, dtype=np.complex128)
        return np.asarray(self.lu.solve(values, trans="H" if adjoint else "N"))


def resolvent(
    system: SecondOrderSystem, omega: float, extra: Optional[DenseMatrix] = None
) -> Optional[_Resolvent]:
    try:
        return _Resolvent(system, omega, extra)
    except RuntimeError:
        logger.warning(f"K(i omega) is singular at omega={omega:.6g}")
        return None


def inverse_norm(system: SecondOrderSystem, omega: float, seed: int = 42) -> float:
    """sigma_max(K(i omega)^-1) by inverse power iteration on K^H K.

    Returns +inf when K(i omega) is singular.
    """
    factor = resolvent(system, omega)
    if factor is None:
        return float("inf")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(system.n) + 1j * rng.standard_normal(system.n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(INVERSE_POWER_ITERATIONS):
        w = factor.solve(factor.solve(v), adjoint=True)
        norm = float(np.linalg.norm(w))
        if norm == 0.0 or not np.isfinite(norm):
            return float("inf") if not np.isfinite(norm) else 0.0
        v = w / norm
        previous, estimate = estimate, float(np.sqrt(norm))
        if abs(estimate - previous) <= INVERSE_POWER_TOL * estimate:
            break
    return estimate


def _refined_max(
    evaluate: Callable[[float], float], grid: npt.NDArray[np.float64]
) -> Tuple[float, float]:
    values = np.array([evaluate(float(omega)) for omega in grid])
    peak = int(np.argmax(values))
    best_value, best_omega = float(values[peak]), float(grid[peak])
    if np.isinf(best_value) or len(grid) < 2:
        return best_value, best_omega
    lo = grid[max(peak - 1, 0)]
    hi = grid[min(peak + 1, len(grid) - 1)]
    for omega in np.geomspace(lo, hi, REFINE_POINTS):
        value = evaluate(float(omega))
        if value > best_value:
            best_value, best_omega = value, float(omega)
    return best_value, best_omega


def hinf_inverse(
    system: SecondOrderSystem, grid: npt.NDArray[np.float64], seed: int = 42
) -> Tuple[float, float]:
    """max over the grid of sigma_max(K(i omega)^-1), refined once around the peak."""
    return _refined_max(lambda omega: inverse_norm(system, omega, seed), grid)


def _check_grid(grid: npt.ArrayLike) -> npt.NDArray[np.float64]:
    values = np.asarray(grid, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("Frequency grid is empty")
    return values


def check_theorem2(
    system: SecondOrderSystem,
    z: PerturbationEstimate,
    freq_grid: Optional[npt.ArrayLike] = None,
    seed: int = 42,
) -> Theorem2Result:
    """Evaluates ||K(s)^-1||_Hinf ||Z|| and whether it is below one."""
    grid = _check_grid(default_grid() if freq_grid is None else freq_grid)
    if z.z_norm == 0.0:
        return Theorem2Result(0.0, True, float("nan"), 0.0, float("nan"))
    hinf, peak = hinf_inverse(system, grid, seed)
    value = hinf * z.z_norm
    holds = bool(np.isfinite(value) and value < 1.0)
    logger.info(
        f"Stability condition {value:.3e} ({'holds' if holds else 'violated'}); "
        f"||K^-1||_Hinf ~ {hinf:.3e} at omega={peak:.4g}"
    )
    return Theorem2Result(float(value), holds, float(hinf), z.z_norm, peak)


def perturbed_system(
    system: SecondOrderSystem, z: PerturbationEstimate
) -> SecondOrderSystem:
    """The system with K replaced by K + Z (dense Z, desk scale only)."""
    if system.n > DEFAULT_MAX_DIM:
        raise LedgerError(
            f"Perturbed systems are formed densely; n={system.n} is too large"
        )
    stiffness = as_sparse(system.K.toarray() + z.Z)
    return SecondOrderSystem(
        M=system.M,
        D=system.D,
        K=stiffness,
        F=system.F,
        Cp=system.Cp,
        Cv=system.Cv,
        alpha=system.alpha,
        beta=system.beta,
        proportional=False,
    )


def _trapezoid(
    values: npt.NDArray[np.float64], omegas: npt.NDArray[np.float64]
) -> float:
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(omegas)))


def theorem1_bound(
    system: SecondOrderSystem,
    z: PerturbationEstimate,
    freq_grid: Optional[npt.ArrayLike] = None,
    seed: int = 42,
    condition: Optional[Theorem2Result] = None,
) -> Theorem1Result:
    """Right-hand side of the H2 error bound and the measured ||H - H~||_H2.

    H2 factors integrate over [0] + grid with the trapezoid rule; the measured
    error uses H - H~ = C(s) (K + Z)(s)^-1 Z K(s)^-1 F on the same points.

    ``condition`` reuses an earlier stability check on the same grid.

    Raises:
        PreconditionError: The stability condition does not hold.
    """
    grid = _check_grid(default_grid() if freq_grid is None else freq_grid)
    if condition is None:
        condition = check_theorem2(system, z, grid, seed)
    if z.z_norm == 0.0:
        return Theorem1Result(0.0, 0.0, float("nan"), float("nan"), float("nan"))
    if not condition.holds:
        raise PreconditionError(
            "Bound requires ||K^-1||_Hinf ||Z|| < 1, "
            f"got {condition.condition_value:.3e}"
        )
    if system.n > DEFAULT_MAX_DIM:
        raise LedgerError(f"Bound evaluation is dense; n={system.n} is too large")

    omegas = np.concatenate([[0.0], np.sort(grid[grid > 0.0])])
    output_factor = np.zeros(len(omegas))
    input_factor = np.zeros(len(omegas))
    measured = np.zeros(len(omegas))
    for k, omega in enumerate(omegas):
        s = 1j * omega
        factor = resolvent(system, float(omega))
        perturbed = resolvent(system, float(omega), z.Z)
        if factor is None or perturbed is None:
            raise PreconditionError(f"K(i omega) is singular at omega={omega:.6g}")
        output = system.Cp + s * system.Cv
        # ||C K^-1||_F via K^-H C^H
        adjoint = factor.solve(output.conj().T, adjoint=True)
        output_factor[k] = float(np.sum(np.abs(adjoint) ** 2))
        states = factor.solve(system.F)
        input_factor[k] = float(np.linalg.norm(states, 2))
        difference = output @ perturbed.solve(z.Z @ states)
        measured[k] = float(np.sum(np.abs(difference) ** 2))

    h2_factor = float(np.sqrt(_trapezoid(output_factor, omegas) / np.pi))
    input_hinf = float(np.max(input_factor))
    bound = (
        h2_factor * input_hinf * z.z_norm / (1.0 - condition.hinf_factor * z.z_norm)
    )
    measured_h2 = float(np.sqrt(_trapezoid(measured, omegas) / np.pi))
    logger.info(f"H2 error bound {bound:.3e}, measured {measured_h2:.3e}")
    return Theorem1Result(
        bound, measured_h2, h2_factor, input_hinf, condition.hinf_factor
    )
