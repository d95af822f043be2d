import logging
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from airga.linalg import AirgaError
from airga.models.beam import ModelSpec, beam_generate
from airga.reduction.algorithm import airga_run
from airga.reduction.config import AirgaConfig, SolverKind, default_r_max
from airga.reduction.trace import RunTrace, write_csv

logger = logging.getLogger(__name__)

ITERATIONS_FILE = "bench_iterations.csv"
TOTALS_FILE = "bench_totals.csv"
ITERATIONS_COLUMNS = [
    "size",
    "solver",
    "repeat",
    "outer",
    "point_index",
    "cg_iterations",
    "solve_seconds",
    "precond_seconds",
    "status",
]
TOTALS_COLUMNS = [
    "size",
    "solver",
    "repeats",
    "status",
    "r",
    "outer_iterations",
    "cg_iterations",
    "solve_seconds",
    "precond_seconds",
    "precond_seconds_from_update",
]
OK = "ok"

# beam family a bench sweeps, by name
MODELS: Dict[str, Callable[[int], ModelSpec]] = {
    "benchmark": ModelSpec.benchmark,
    "plain": ModelSpec,
}


@dataclass
class BenchCell:
    """All repeats of one (size, solver) configuration."""

    size: int
    solver: SolverKind
    runs: Dict[int, RunTrace] = field(default_factory=dict)
    failures: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def traces(self) -> List[RunTrace]:
        return [self.runs[repeat] for repeat in sorted(self.runs)]

    @property
    def status(self) -> str:
        if not self.failures:
            return OK
        total = len(self.failures) + len(self.runs)
        return f"failed {len(self.failures)}/{total}: {self.failures[0][1]}"

    def iteration_rows(self) -> List[Dict[str, Any]]:
        rows: List[Dict[str, Any]] = []
        for repeat, trace in sorted(self.runs.items()):
            for entry in trace.per_point():
                rows.append(
                    dict(
                        entry,
                        size=self.size,
                        solver=self.solver.value,
                        repeat=repeat,
                        status=OK,
                    )
                )
        for repeat, message in self.failures:
            rows.append(
                {
                    "size": self.size,
                    "solver": self.solver.value,
                    "repeat": repeat,
                    "outer": 0,
                    "point_index": -1,
                    "cg_iterations": 0,
                    "solve_seconds": float("nan"),
                    "precond_seconds": float("nan"),
                    "status": message,
                }
            )
        return rows

    def totals_row(self, update_start: int) -> Dict[str, Any]:
        def median(values: Sequence[float]) -> float:
            return float(statistics.median(values)) if values else float("nan")

        return {
            "size": self.size,
            "solver": self.solver.value,
            "repeats": len(self.traces),
            "status": self.status,
            "r": self.traces[0].final_r if self.traces else 0,
            "outer_iterations": self.traces[0].outer_iterations if self.traces else 0,
            "cg_iterations": self.traces[0].cg_iterations if self.traces else 0,
            "solve_seconds": median([t.solve_seconds for t in self.traces]),
            "precond_seconds": median([t.precond_seconds() for t in self.traces]),
            "precond_seconds_from_update": median(
                [t.precond_seconds(update_start) for t in self.traces]
            ),
        }


@dataclass
class BenchResult:
    cells: List[BenchCell]
    update_start: int

    def iteration_rows(self) -> List[Dict[str, Any]]:
        return [row for cell in self.cells for row in cell.iteration_rows()]

    def totals_rows(self) -> List[Dict[str, Any]]:
        return [cell.totals_row(self.update_start) for cell in self.cells]


def run_bench(
    sizes: Sequence[int],
    solvers: Sequence[SolverKind],
    repeats: int = 3,
    base: Optional[AirgaConfig] = None,
    r_max: Optional[int] = None,
    model: Callable[[int], ModelSpec] = ModelSpec.benchmark,
) -> BenchResult:
    """Runs every (size, solver) cell ``repeats`` times on the beam ``model(size)``.

    Without ``r_max`` each size gets its default reduced order.
    Failures are recorded per cell and do not stop the remaining cells. Cells
    run sequentially.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    base = base or AirgaConfig()
    cells = []
    for size in sizes:
        system = beam_generate(model(size))
        for solver in solvers:
            cfg = replace(base, solver=solver, r_max=r_max or default_r_max(size))
            cell = BenchCell(size, solver)
            for repeat in range(repeats):
                logger.info(
                    f"Bench n={size} solver={solver.value} "
                    f"repeat {repeat + 1}/{repeats}"
                )
                try:
                    _, trace = airga_run(system, cfg)
                except AirgaError as e:
                    logger.warning(f"Bench cell n={size} {solver.value} failed: {e}")
                    cell.failures.append((repeat, str(e)))
                else:
                    cell.runs[repeat] = trace
            cells.append(cell)
    return BenchResult(cells, base.update_start_iteration)


def write_bench(result: BenchResult, directory: Union[str, Path]) -> Dict[str, Path]:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    paths = {"iterations": target / ITERATIONS_FILE, "totals": target / TOTALS_FILE}
    write_csv(paths["iterations"], ITERATIONS_COLUMNS, result.iteration_rows())
    write_csv(paths["totals"], TOTALS_COLUMNS, result.totals_rows())
    return paths
