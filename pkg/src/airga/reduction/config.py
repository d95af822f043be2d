import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from airga.reduction import constants as c
from airga.reduction.points import ExpansionPointSet, linear_points
from airga.spai import SpaiMode, SpaiOptions


class SolverKind(enum.Enum):
    DIRECT = "direct"
    CG = "cg"
    CG_SPAI = "cg-spai"
    CG_SPAI_UPDATE = "cg-spai-update"

    @property
    def iterative(self) -> bool:
        return self is not SolverKind.DIRECT

    @property
    def preconditioned(self) -> bool:
        return self in (SolverKind.CG_SPAI, SolverKind.CG_SPAI_UPDATE)


class H2Method(enum.Enum):
    LYAPUNOV = "lyapunov"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class AirgaConfig:
    """Run configuration of an AIRGA reduction.

    Tolerances on H2 changes are relative to the H2 norm of the newer system.
    ``cg_maxit`` of None means 10 n iterations per solve. SPAI columns that miss
    ``spai_tol`` are kept unless ``spai_strict`` is set.
    """

    r_max: int = c.DEFAULT_R_MAX
    initial_points: ExpansionPointSet = field(
        default_factory=lambda: linear_points(
            *c.DEFAULT_POINT_RANGE, c.DEFAULT_POINT_COUNT
        )
    )
    outer_tol: float = c.DEFAULT_OUTER_TOL
    inner_tol: float = c.DEFAULT_INNER_TOL
    solver: SolverKind = SolverKind.DIRECT
    spai_tol: float = c.DEFAULT_SPAI_TOL
    spai_max_col_iters: int = 50
    spai_mode: SpaiMode = SpaiMode.SEQUENTIAL
    spai_strict: bool = False
    cg_rtol: float = c.DEFAULT_CG_RTOL
    cg_maxit: Optional[int] = None
    update_start_iteration: int = c.DEFAULT_UPDATE_START
    max_outer: int = c.DEFAULT_MAX_OUTER
    h2_method: H2Method = H2Method.LYAPUNOV
    workers: int = 1
    seed: int = c.DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.outer_tol <= 0 or self.inner_tol <= 0:
            raise ValueError(
                f"Tolerances must be positive, got outer {self.outer_tol}, "
                f"inner {self.inner_tol}"
            )
        if self.r_max < 1:
            raise ValueError(f"r_max must be >= 1, got {self.r_max}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.cg_rtol <= 0:
            raise ValueError(f"cg_rtol must be positive, got {self.cg_rtol}")
        if self.update_start_iteration < 2:
            raise ValueError(
                "update_start_iteration must be >= 2, "
                f"got {self.update_start_iteration}"
            )
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def validate_for(self, m: int) -> None:
        if self.r_max < m:
            raise ValueError(
                f"r_max ({self.r_max}) must be at least the input count {m}"
            )

    def inner_limit(self, m: int) -> int:
        return math.ceil(self.r_max / m)

    @property
    def spai_options(self) -> SpaiOptions:
        return SpaiOptions(
            tol=self.spai_tol,
            max_col_iters=self.spai_max_col_iters,
            mode=self.spai_mode,
            workers=self.workers,
            strict=self.spai_strict,
        )


def default_r_max(n: int) -> int:
    return c.LARGE_MODEL_R_MAX if n >= c.LARGE_MODEL_SIZE else c.DEFAULT_R_MAX
