"""Post-hoc stability report for an inexact AIRGA run."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import numpy.typing as npt

from airga.reduction.system import SecondOrderSystem
from airga.reduction.trace import RunLedger, RunTrace, write_csv

from .ledger import (
    DEFAULT_MAX_DIM,
    Construction,
    OrthogonalityReport,
    PerturbationEstimate,
    ResidualLedger,
    build_ledger,
    check_galerkin_orthogonality,
    compute_Z,
)
from .stability import (
    Theorem1Result,
    Theorem2Result,
    check_theorem2,
    default_grid,
    theorem1_bound,
)

logger = logging.getLogger(__name__)

REPORT_FILE = "diagnostics.txt"
ORTHOGONALITY_FILE = "orthogonality.csv"


@dataclass(frozen=True, eq=False)
class DiagnosticReport:
    ledger: ResidualLedger
    orthogonality: OrthogonalityReport
    perturbation: PerturbationEstimate
    condition: Theorem2Result
    bound: Optional[Theorem1Result]
    seed: int

    def summary(self) -> Dict[str, object]:
        bound = self.bound
        return {
            "seed": self.seed,
            "ledger_entries": len(self.ledger),
            "selected_points": " ".join(
                repr(float(p)) for p in self.ledger.selected_points
            ),
            "construction": self.perturbation.construction.value,
            "z_norm": self.perturbation.z_norm,
            "equation_residual": self.perturbation.equation_residual(self.ledger),
            "condition_value": self.condition.condition_value,
            "stable": "true" if self.condition.holds else "false",
            "hinf_factor": self.condition.hinf_factor,
            "peak_frequency": self.condition.peak_frequency,
            "bound": bound.bound if bound is not None else float("nan"),
            "measured_h2_difference": (
                bound.measured if bound is not None else float("nan")
            ),
        }


def diagnose(
    system: SecondOrderSystem,
    trace: Union[RunTrace, RunLedger],
    freq_grid: Optional[npt.ArrayLike] = None,
    construction: Construction = Construction.MIN_NORM_PSEUDOINVERSE,
    max_dim: int = DEFAULT_MAX_DIM,
    seed: int = 42,
) -> DiagnosticReport:
    """Runs every stability check on the last outer iteration of ``trace``.

    The H2 bound is only evaluated when the stability condition holds.
    """
    ledger = build_ledger(trace)
    if ledger.n != system.n:
        raise ValueError(
            f"Ledger blocks have {ledger.n} rows but the system has n={system.n}"
        )
    if freq_grid is None:
        grid = default_grid()
    else:
        grid = np.asarray(freq_grid, dtype=np.float64)
    orthogonality = check_galerkin_orthogonality(ledger.basis_blocks, ledger)
    perturbation = compute_Z(ledger, construction, max_dim, seed)
    condition = check_theorem2(system, perturbation, grid, seed)
    bound = (
        theorem1_bound(system, perturbation, grid, seed, condition)
        if condition.holds
        else None
    )
    if bound is None:
        logger.warning(
            "Stability condition violated; the H2 error bound does not apply"
        )
    return DiagnosticReport(ledger, orthogonality, perturbation, condition, bound, seed)


def write_report(
    report: DiagnosticReport, directory: Union[str, Path]
) -> Dict[str, Path]:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": target / REPORT_FILE,
        "orthogonality": target / ORTHOGONALITY_FILE,
    }
    with open(paths["report"], "w", encoding="utf-8") as f:
        for key, value in report.summary().items():
            text = repr(value) if isinstance(value, float) else str(value)
            f.write(f"{key}={text}\n")
    matrix = report.orthogonality.basis_matrix
    columns = ["basis_block"] + [f"entry_{j}" for j in range(matrix.shape[1])]
    rows = [
        dict(zip(columns, [t] + [float(value) for value in matrix[t]]))
        for t in range(matrix.shape[0])
    ]
    write_csv(paths["orthogonality"], columns, rows)
    return paths
