import csv
from pathlib import Path

import numpy as np
import pytest

from airga.diagnostics.ledger import LedgerError
from airga.diagnostics.report import diagnose, write_report
from airga.diagnostics.stability import default_grid
from airga.reduction.algorithm import airga_run
from airga.reduction.config import AirgaConfig, SolverKind
from airga.reduction.trace import RunTrace
from tests import beam

GRID = default_grid(1e-2, 1e2, 80)


@pytest.fixture(scope="module")
def cg_run() -> tuple:
    system = beam(100)
    cfg = AirgaConfig(solver=SolverKind.CG, cg_rtol=1e-10, max_outer=2)
    _, trace = airga_run(system, cfg)
    return system, trace


def test_unpreconditioned_cg_run(cg_run: tuple) -> None:
    system, trace = cg_run
    report = diagnose(system, trace, GRID)

    eta_norm = np.linalg.norm(report.ledger.stacked_residuals())
    assert report.perturbation.equation_residual(report.ledger) <= 1e-8 * eta_norm
    assert report.condition.holds
    assert report.condition.condition_value < 1.0
    assert report.bound is not None
    assert report.bound.measured <= report.bound.bound

    summary = report.summary()
    assert summary["stable"] == "true"
    assert summary["ledger_entries"] == len(report.ledger)
    assert report.orthogonality.basis_matrix.shape == (
        len(report.ledger.basis_blocks),
        len(report.ledger),
    )


def test_ledger_residuals_follow_the_tolerance(cg_run: tuple) -> None:
    _, trace = cg_run
    assert trace.ledger is not None
    for entry in trace.ledger.entries:
        norms = np.linalg.norm(entry.residual, axis=0)
        assert np.all(norms <= 1e-10 * entry.rhs_norms * 1.01)


def test_write_report(cg_run: tuple, tmp_path: Path) -> None:
    system, trace = cg_run
    report = diagnose(system, trace, GRID)
    paths = write_report(report, tmp_path)
    lines = paths["report"].read_text().splitlines()
    assert "stable=true" in lines
    assert any(line.startswith("z_norm=") for line in lines)
    with open(paths["orthogonality"], newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == len(report.ledger.basis_blocks)


def test_direct_trace_is_rejected() -> None:
    with pytest.raises(LedgerError):
        diagnose(beam(10), RunTrace(solver="direct", seed=42), GRID)


def test_system_must_match_the_ledger(cg_run: tuple) -> None:
    _, trace = cg_run
    with pytest.raises(ValueError):
        diagnose(beam(50), trace, GRID)
