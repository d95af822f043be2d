import csv
from pathlib import Path

import pytest

from airga.bench.runner import (
    ITERATIONS_COLUMNS,
    OK,
    TOTALS_COLUMNS,
    run_bench,
    write_bench,
)
from airga.reduction.config import AirgaConfig, SolverKind


def test_one_cell(tmp_path: Path) -> None:
    result = run_bench(
        [30], [SolverKind.CG_SPAI], repeats=2, base=AirgaConfig(max_outer=1), r_max=6
    )
    (cell,) = result.cells
    assert cell.status == OK
    assert len(cell.traces) == 2

    (totals,) = result.totals_rows()
    assert totals["size"] == 30 and totals["solver"] == "cg-spai"
    assert totals["repeats"] == 2
    assert totals["r"] <= 6
    assert totals["precond_seconds"] > 0.0
    # three initial points, one outer iteration
    assert [row["point_index"] for row in cell.iteration_rows()] == [0, 1, 2, 0, 1, 2]

    paths = write_bench(result, tmp_path / "bench")
    with open(paths["totals"], newline="") as f:
        reader = csv.DictReader(f)
        assert reader.fieldnames == TOTALS_COLUMNS
        assert len(list(reader)) == 1
    with open(paths["iterations"], newline="") as f:
        reader = csv.DictReader(f)
        assert reader.fieldnames == ITERATIONS_COLUMNS
        assert {row["repeat"] for row in reader} == {"0", "1"}


def test_failures_are_recorded_per_cell() -> None:
    stagnating = AirgaConfig(
        max_outer=1, spai_tol=1e-14, spai_max_col_iters=1, spai_strict=True
    )
    result = run_bench(
        [20],
        [SolverKind.DIRECT, SolverKind.CG_SPAI],
        repeats=1,
        base=stagnating,
        r_max=4,
    )
    direct, spai = result.cells
    assert direct.status == OK
    assert spai.status.startswith("failed 1/1: ")
    (row,) = spai.iteration_rows()
    assert row["repeat"] == 0 and row["status"] != OK
    totals = spai.totals_row(result.update_start)
    assert totals["repeats"] == 0 and totals["r"] == 0


def test_repeats_must_be_positive() -> None:
    with pytest.raises(ValueError):
        run_bench([10], [SolverKind.DIRECT], repeats=0)
