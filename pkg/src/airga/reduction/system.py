"""Full and reduced second-order systems.

A system is M x'' + D x' + K x = F u with output y = Cp x + Cv x'. Its transfer
function is H(s) = (Cp + s Cv) (s^2 M + s D + K)^-1 F.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from airga.linalg import (
    AirgaError,
    DenseMatrix,
    SingularMatrixError,
    SparseMatrix,
    as_sparse,
    dense_solve,
    frob_norm,
    sp_add_scaled,
)

logger = logging.getLogger(__name__)

DAMPING_TOL = 1e-10


class SystemValidationError(AirgaError):
    pass


@dataclass(frozen=True, eq=False)
class SecondOrderSystem:
    M: SparseMatrix
    D: SparseMatrix
    K: SparseMatrix
    F: DenseMatrix
    Cp: DenseMatrix
    Cv: DenseMatrix
    alpha: float = 0.0
    beta: float = 0.0
    proportional: bool = False

    def __post_init__(self) -> None:
        n = self.M.shape[0]
        for name in ("M", "D", "K"):
            shape = getattr(self, name).shape
            if shape != (n, n):
                raise SystemValidationError(
                    f"{name} has shape {shape}, expected ({n}, {n})"
                )
        if self.F.ndim != 2 or self.F.shape[0] != n:
            raise SystemValidationError(
                f"F has shape {self.F.shape}, expected ({n}, m)"
            )
        if self.Cp.ndim != 2 or self.Cp.shape[1] != n:
            raise SystemValidationError(
                f"Cp has shape {self.Cp.shape}, expected (q, {n})"
            )
        if self.Cv.shape != self.Cp.shape:
            raise SystemValidationError(
                f"Cv has shape {self.Cv.shape}, expected {self.Cp.shape}"
            )
        if self.proportional:
            expected = sp_add_scaled(self.M, self.K, self.alpha, self.beta)
            mismatch = frob_norm(sp_add_scaled(self.D, expected, 1.0, -1.0))
            if mismatch > DAMPING_TOL * max(frob_norm(self.D), 1.0):
                raise SystemValidationError(
                    f"D differs from {self.alpha}*M + {self.beta}*K by {mismatch:.3e}"
                )

    @classmethod
    def proportionally_damped(
        cls,
        M: SparseMatrix,
        K: SparseMatrix,
        F: npt.ArrayLike,
        Cp: npt.ArrayLike,
        alpha: float,
        beta: float,
        Cv: Union[npt.ArrayLike, None] = None,
    ) -> "SecondOrderSystem":
        """Builds a system with D = alpha M + beta K."""
        mass = as_sparse(M)
        stiffness = as_sparse(K)
        inputs = np.atleast_2d(np.asarray(F, dtype=np.float64))
        if inputs.shape[0] != mass.shape[0] and inputs.shape[1] == mass.shape[0]:
            inputs = inputs.T
        outputs = np.atleast_2d(np.asarray(Cp, dtype=np.float64))
        velocity = (
            np.zeros_like(outputs)
            if Cv is None
            else np.atleast_2d(np.asarray(Cv, dtype=np.float64))
        )
        return cls(
            M=mass,
            D=sp_add_scaled(mass, stiffness, alpha, beta),
            K=stiffness,
            F=inputs,
            Cp=outputs,
            Cv=velocity,
            alpha=alpha,
            beta=beta,
            proportional=True,
        )

    @property
    def n(self) -> int:
        return int(self.M.shape[0])

    @property
    def m(self) -> int:
        return int(self.F.shape[1])

    @property
    def q(self) -> int:
        return int(self.Cp.shape[0])

    @property
    def has_velocity_output(self) -> bool:
        return bool(np.any(self.Cv != 0.0))

    def shifted(self, s: float) -> SparseMatrix:
        """s^2 M + s D + K."""
        return sp_add_scaled(sp_add_scaled(self.M, self.D, s * s, s), self.K, 1.0, 1.0)

    def dense(self) -> "DenseSystem":
        return DenseSystem(
            M=self.M.toarray(),
            D=self.D.toarray(),
            K=self.K.toarray(),
            F=np.array(self.F),
            Cp=np.array(self.Cp),
            Cv=np.array(self.Cv),
        )


@dataclass(frozen=True, eq=False)
class DenseSystem:
    """Dense (M, D, K, F, Cp, Cv) tuple used by the small-dimension kernels."""

    M: DenseMatrix
    D: DenseMatrix
    K: DenseMatrix
    F: DenseMatrix
    Cp: DenseMatrix
    Cv: DenseMatrix

    @property
    def n(self) -> int:
        return int(self.M.shape[0])

    def dense(self) -> "DenseSystem":
        return self


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Basis blocks V_1..V_J and the orthonormal matrix assembled from them."""

    blocks: List[DenseMatrix]
    assembled: DenseMatrix

    @property
    def r(self) -> int:
        return int(self.assembled.shape[1])


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    Mh: DenseMatrix
    Dh: DenseMatrix
    Kh: DenseMatrix
    Fh: DenseMatrix
    Cph: DenseMatrix
    Cvh: DenseMatrix
    basis: OrthonormalBasis
    alpha: float = 0.0
    beta: float = 0.0
    proportional: bool = False
    points: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def r(self) -> int:
        return int(self.Mh.shape[0])

    def dense(self) -> DenseSystem:
        return DenseSystem(self.Mh, self.Dh, self.Kh, self.Fh, self.Cph, self.Cvh)

    def to_system(self) -> SecondOrderSystem:
        """The reduced matrices as a (small) SecondOrderSystem for file I/O."""
        return SecondOrderSystem(
            M=as_sparse(self.Mh),
            D=as_sparse(self.Dh),
            K=as_sparse(self.Kh),
            F=np.array(self.Fh),
            Cp=np.array(self.Cph),
            Cv=np.array(self.Cvh),
            alpha=self.alpha,
            beta=self.beta,
            proportional=self.proportional,
        )


AnySystem = Union[SecondOrderSystem, ReducedSystem, DenseSystem]


def transfer(system: AnySystem, s: complex) -> npt.NDArray[np.complex128]:
    """Evaluates H(s) = (Cp + s Cv)(s^2 M + s D + K)^-1 F, a q x m matrix.

    Raises:
        SingularMatrixError: s is a pole of the system.
    """
    if isinstance(system, SecondOrderSystem):
        operator = s * s * system.M + s * system.D + system.K
        rhs = system.F.astype(np.complex128)
        try:
            lu = scipy.sparse.linalg.splu(operator.astype(np.complex128).tocsc())
            states = lu.solve(rhs)
        except RuntimeError as e:
            raise SingularMatrixError(f"s={s} is a pole of the system: {e}", -1) from e
        output = system.Cp + s * system.Cv
        return np.asarray(output @ states, dtype=np.complex128)
    parts = system.dense()
    operator = s * s * parts.M + s * parts.D + parts.K
    try:
        states = dense_solve(operator, parts.F.astype(np.complex128))
    except SingularMatrixError as e:
        raise SingularMatrixError(
            f"s={s} is a pole of the reduced system: {e}", -1
        ) from e
    return np.asarray((parts.Cp + s * parts.Cv) @ states, dtype=np.complex128)


def transfer_moments(system: AnySystem, s0: float, count: int) -> List[DenseMatrix]:
    """Taylor coefficients of H(s) about the real point ``s0``.

    The state moments follow the three-term recursion
    X_j = K(s0)^-1 [-(2 s0 M + D) X_{j-1} - M X_{j-2}] with X_0 = K(s0)^-1 F,
    and the output moments are Cp X_j + Cv (s0 X_j + X_{j-1}).
    """
    states = state_moments(system, s0, count)
    if isinstance(system, SecondOrderSystem):
        cp, cv = system.Cp, system.Cv
    else:
        parts = system.dense()
        cp, cv = parts.Cp, parts.Cv
    result = []
    for j, x in enumerate(states):
        previous = states[j - 1] if j > 0 else np.zeros_like(x)
        result.append(cp @ x + cv @ (s0 * x + previous))
    return result


def state_moments(system: AnySystem, s0: float, count: int) -> List[DenseMatrix]:
    if isinstance(system, SecondOrderSystem):
        lu = scipy.sparse.linalg.splu(system.shifted(s0).tocsc())
        M, D, F = system.M, system.D, system.F

        def solve(rhs: DenseMatrix) -> DenseMatrix:
            return np.asarray(lu.solve(np.asarray(rhs)))

    else:
        parts = system.dense()
        M, D, F = parts.M, parts.D, parts.F
        factor = scipy.linalg.lu_factor(s0 * s0 * parts.M + s0 * parts.D + parts.K)

        def solve(rhs: DenseMatrix) -> DenseMatrix:
            return np.asarray(scipy.linalg.lu_solve(factor, rhs))

    moments: List[DenseMatrix] = []
    for j in range(count):
        if j == 0:
            moments.append(solve(F))
            continue
        rhs = -(2.0 * s0 * (M @ moments[j - 1]) + D @ moments[j - 1])
        if j >= 2:
            rhs = rhs - M @ moments[j - 2]
        moments.append(solve(np.asarray(rhs)))
    return moments
