"""H2 norms of second-order systems and of their differences."""
import logging
import warnings
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.integrate

from airga.eigen import StabilityError, lyap_solve, quad_eig
from airga.linalg import DenseMatrix, dense_solve
from airga.reduction.config import H2Method
from airga.reduction.system import AnySystem, SecondOrderSystem, transfer

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-8
QUAD_LIMIT = 500
TAIL_TOL = 1e-4
MAX_DOUBLINGS = 60
# full systems above this size get no resonance break points
BREAK_POINT_MAX_DIM = 200


class H2Result(NamedTuple):
    value: float
    method: H2Method


def first_order_realization(
    system: AnySystem,
) -> Tuple[DenseMatrix, DenseMatrix, DenseMatrix]:
    """Returns (A, B, C) of the realization with state [x, x'].

    A = [[0, I], [-M^-1 K, -M^-1 D]], B = [[0], [M^-1 F]], C = [Cp, Cv].
    """
    parts = system.dense()
    n = parts.n
    m_inv = dense_solve(parts.M, np.hstack([parts.K, parts.D, parts.F]))
    m_inv_k, m_inv_d, m_inv_f = m_inv[:, :n], m_inv[:, n : 2 * n], m_inv[:, 2 * n :]
    a = np.block([[np.zeros((n, n)), np.eye(n)], [-m_inv_k, -m_inv_d]])
    b = np.vstack([np.zeros_like(m_inv_f), m_inv_f])
    c = np.hstack([parts.Cp, parts.Cv])
    return a, b, c


def h2_first_order(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix) -> float:
    """sqrt(trace(C P C^T)) with A P + P A^T + B B^T = 0."""
    gramian = lyap_solve(a, b @ b.T)
    value = float(np.trace(c @ gramian @ c.T))
    return float(np.sqrt(max(value, 0.0)))


def _lyapunov(system: AnySystem, other: Optional[AnySystem]) -> float:
    a1, b1, c1 = first_order_realization(system)
    if other is None:
        return h2_first_order(a1, b1, c1)
    a2, b2, c2 = first_order_realization(other)
    a = np.block(
        [
            [a1, np.zeros((a1.shape[0], a2.shape[1]))],
            [np.zeros((a2.shape[0], a1.shape[1])), a2],
        ]
    )
    b = np.vstack([b1, b2])
    c = np.hstack([c1, -c2])
    return h2_first_order(a, b, c)


def _resonances(system: AnySystem) -> List[float]:
    if isinstance(system, SecondOrderSystem) and system.n > BREAK_POINT_MAX_DIM:
        return []
    parts = system.dense()
    spectrum = quad_eig(parts.M, parts.D, parts.K)
    return [
        float(abs(value.imag)) for value in spectrum.eigenvalues if value.imag > 0.0
    ]


def _quadrature(system: AnySystem, other: Optional[AnySystem]) -> float:
    def integrand(omega: float) -> float:
        value = transfer(system, 1j * omega)
        if other is not None:
            value = value - transfer(other, 1j * omega)
        return float(np.sum(np.abs(value) ** 2))

    peaks = _resonances(system) + ([] if other is None else _resonances(other))
    omega_max = 10.0 * max([1.0] + peaks)
    breaks = sorted(set(p for p in peaks if 0.0 < p < omega_max)) or None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=scipy.integrate.IntegrationWarning)
        total, _ = scipy.integrate.quad(
            integrand,
            0.0,
            omega_max,
            points=breaks,
            limit=QUAD_LIMIT,
            epsabs=0.0,
            epsrel=QUAD_EPSREL,
        )
        for _ in range(MAX_DOUBLINGS):
            tail, _ = scipy.integrate.quad(
                integrand,
                omega_max,
                2.0 * omega_max,
                limit=QUAD_LIMIT,
                epsabs=0.0,
                epsrel=QUAD_EPSREL,
            )
            total += tail
            omega_max *= 2.0
            if tail <= TAIL_TOL * total:
                break
        else:
            logger.warning(
                f"H2 quadrature tail still above {TAIL_TOL:g} relative at "
                f"omega={omega_max:.3g}"
            )
    return float(np.sqrt(max(total, 0.0) / np.pi))


def h2_norm(
    system: AnySystem,
    other: Optional[AnySystem] = None,
    method: H2Method = H2Method.LYAPUNOV,
) -> float:
    """H2 norm of ``system``, or of ``system - other`` when ``other`` is given.

    Raises:
        StabilityError: The Lyapunov method was requested for a realization
            that is not Hurwitz.
    """
    if other is not None and system.dense().F.shape[1] != other.dense().F.shape[1]:
        raise ValueError("Systems with different input counts cannot be compared")
    if method is H2Method.LYAPUNOV:
        return _lyapunov(system, other)
    return _quadrature(system, other)


def h2_distance(
    system: AnySystem,
    other: Optional[AnySystem] = None,
    method: H2Method = H2Method.LYAPUNOV,
) -> H2Result:
    """Like ``h2_norm`` but falls back to quadrature on non-Hurwitz realizations."""
    try:
        return H2Result(h2_norm(system, other, method), method)
    except StabilityError as e:
        logger.warning(f"Falling back to H2 quadrature: {e}")
        fallback = H2Method.QUADRATURE
        return H2Result(h2_norm(system, other, fallback), fallback)


def relative_h2_change(
    newer: AnySystem, older: AnySystem, method: H2Method = H2Method.LYAPUNOV
) -> H2Result:
    """||newer - older||_H2 / ||newer||_H2, with quadrature fallback.

    A vanishing reference norm reports an infinite change.
    """
    distance = h2_distance(newer, older, method)
    reference = h2_distance(newer, None, distance.method)
    if not reference.value > 0.0:
        logger.debug("H2 reference norm vanished; reporting an infinite change")
        return H2Result(float("inf"), distance.method)
    return H2Result(distance.value / reference.value, distance.method)
