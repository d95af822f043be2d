"""Accuracy of a reduced system against its full system."""
import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import numpy.typing as npt

from airga.reduction.config import H2Method
from airga.reduction.norms import relative_h2_change
from airga.reduction.system import AnySystem, SystemValidationError, transfer

logger = logging.getLogger(__name__)

# largest full dimension for which the dense Lyapunov H2 is used
LYAPUNOV_MAX_DIM = 500


@dataclass(frozen=True)
class FrequencyError:
    omega: float
    absolute: float
    relative: float


@dataclass(frozen=True)
class Evaluation:
    relative_h2_error: float
    h2_method: H2Method
    pointwise: List[FrequencyError]

    @property
    def max_pointwise_error(self) -> float:
        return max((e.absolute for e in self.pointwise), default=float("nan"))

    @property
    def max_relative_pointwise_error(self) -> float:
        return max((e.relative for e in self.pointwise), default=float("nan"))


def evaluate_reduction(
    full: AnySystem, reduced: AnySystem, grid: npt.ArrayLike
) -> Evaluation:
    """Relative H2 error and transfer-function errors on the i omega grid.

    Raises:
        SystemValidationError: The systems have different input or output counts.
    """
    full_parts, reduced_parts = full.dense(), reduced.dense()
    if (
        full_parts.F.shape[1] != reduced_parts.F.shape[1]
        or full_parts.Cp.shape[0] != reduced_parts.Cp.shape[0]
    ):
        raise SystemValidationError(
            f"Full system is {full_parts.Cp.shape[0]}x{full_parts.F.shape[1]} "
            f"(outputs x inputs), reduced is "
            f"{reduced_parts.Cp.shape[0]}x{reduced_parts.F.shape[1]}"
        )
    if full_parts.n <= LYAPUNOV_MAX_DIM:
        method = H2Method.LYAPUNOV
    else:
        method = H2Method.QUADRATURE
    change = relative_h2_change(full, reduced, method)
    pointwise = []
    for omega in np.asarray(grid, dtype=np.float64).ravel():
        h_full = transfer(full, 1j * omega)
        h_reduced = transfer(reduced, 1j * omega)
        absolute = float(np.linalg.norm(h_full - h_reduced, 2))
        scale = float(np.linalg.norm(h_full, 2))
        relative = absolute / scale if scale > 0.0 else absolute
        pointwise.append(FrequencyError(float(omega), absolute, relative))
    logger.info(
        f"Relative H2 error {change.value:.3e} ({change.method.value}), max pointwise "
        f"error {max((e.absolute for e in pointwise), default=float('nan')):.3e}"
    )
    return Evaluation(change.value, change.method, pointwise)
