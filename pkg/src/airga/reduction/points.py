"""Expansion point sets and their refresh from reduced eigenvalues."""
import enum
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from airga.eigen import quad_eig
from airga.linalg import AirgaError
from airga.reduction.constants import POINT_DEDUP_GAP
from airga.reduction.system import ReducedSystem

logger = logging.getLogger(__name__)


class PointError(AirgaError):
    """No usable expansion point could be chosen."""


class PointOrigin(enum.Enum):
    INITIAL = "initial"
    QUAD_EIG = "quad_eig"


@dataclass(frozen=True)
class ExpansionPointSet:
    points: Tuple[float, ...]
    origin: PointOrigin = PointOrigin.INITIAL
    padded: bool = False

    def __post_init__(self) -> None:
        values = np.array(self.points, dtype=np.float64)
        if values.size == 0:
            raise ValueError("An expansion point set needs at least one point")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Expansion points must be finite: {self.points}")
        if np.any(np.diff(values) <= 0.0):
            raise ValueError(
                f"Expansion points must be distinct and ascending: {self.points}"
            )

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[float]:
        return iter(self.points)

    def __getitem__(self, index: int) -> float:
        return self.points[index]

    def describe(self) -> str:
        return " ".join(f"{point:.12g}" for point in self.points)


def linear_points(start: float, stop: float, count: int) -> ExpansionPointSet:
    """``count`` points linearly spaced on [start, stop]."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if count == 1:
        return ExpansionPointSet((float(start),))
    return ExpansionPointSet(tuple(float(x) for x in np.linspace(start, stop, count)))


def parse_points(text: str) -> ExpansionPointSet:
    """Parses ``a:b:l`` into ``l`` linearly spaced points on [a, b]."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"Expected a:b:l, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"Expected a:b:l with numbers, got {text!r}")
    return linear_points(start, stop, count)


def _dedup(values: Sequence[float]) -> List[float]:
    kept: List[float] = []
    for value in sorted(values):
        if kept:
            scale = max(abs(value), abs(kept[-1]))
            if abs(value - kept[-1]) <= POINT_DEDUP_GAP * scale:
                continue
        kept.append(value)
    return kept


def refresh_points(
    rs: ReducedSystem, l: int, previous: Optional[ExpansionPointSet] = None
) -> ExpansionPointSet:
    """Chooses the next ``l`` expansion points from the reduced eigenvalues.

    Candidates are |Re(lambda)| over the 2r eigenvalues of the reduced
    quadratic problem; the ``l`` smallest strictly positive distinct values are
    returned. Missing slots are filled with points of ``previous`` and the result
    is flagged as padded.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    spectrum = quad_eig(rs.Mh, rs.Dh, rs.Kh)
    magnitudes = np.abs(spectrum.eigenvalues.real)
    scale = float(np.max(np.abs(spectrum.eigenvalues))) if len(spectrum) else 0.0
    positive = [float(x) for x in magnitudes if x > POINT_DEDUP_GAP * scale and x > 0.0]
    candidates = _dedup(positive)[:l]
    padded = False
    if len(candidates) < l and previous is not None:
        padded = True
        for point in previous.points:
            if len(candidates) >= l:
                break
            if all(
                abs(point - kept) > POINT_DEDUP_GAP * max(abs(point), abs(kept))
                for kept in candidates
            ):
                candidates.append(point)
        logger.warning(
            f"Only {len(positive)} usable eigenvalue(s) for {l} expansion points; "
            f"padded with previous points"
        )
    if not candidates:
        raise PointError(
            "No positive expansion point candidates and nothing to pad with"
        )
    return ExpansionPointSet(tuple(sorted(candidates)), PointOrigin.QUAD_EIG, padded)
