"""Run trace of an AIRGA reduction: per-solve, per-preconditioner and
per-iteration records, the residual ledger of the last outer iteration, and
their CSV/npz serialization."""
import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from airga.linalg import DenseMatrix, Vector
from airga.reduction import constants as c

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveRecord:
    outer: int
    inner: int
    point_index: int
    point: float
    order: int
    rhs_columns: int
    cg_iterations: int
    converged: bool
    solve_seconds: float


@dataclass(frozen=True)
class PreconditionerRecord:
    outer: int
    point_index: int
    point: float
    kind: str
    chain_length: int
    alpha: float
    identity_distance: float
    shift_distance: float
    max_column_residual: float
    columns_over_tol: int
    inner_iterations: int
    build_seconds: float


@dataclass(frozen=True)
class IterationRecord:
    outer: int
    r: int
    inner_steps: int
    h2_change: float
    h2_method: str
    points: Tuple[float, ...]
    moment_errors: Tuple[float, ...]
    projection_seconds: float
    points_padded: bool


@dataclass(frozen=True, eq=False)
class LedgerEntry:
    """The raw solve behind one selected basis block.

    ``raw`` solves K(s) X = B up to ``residual`` = K(s) X - B.
    """

    order: int
    point_index: int
    point: float
    raw: DenseMatrix
    residual: DenseMatrix
    preconditioned: DenseMatrix
    rhs_norms: Vector


@dataclass(eq=False)
class RunLedger:
    outer: int
    entries: List[LedgerEntry] = field(default_factory=list)
    basis_blocks: List[DenseMatrix] = field(default_factory=list)


@dataclass(eq=False)
class RunTrace:
    solver: str
    seed: int
    solves: List[SolveRecord] = field(default_factory=list)
    preconditioners: List[PreconditionerRecord] = field(default_factory=list)
    iterations: List[IterationRecord] = field(default_factory=list)
    ledger: Optional[RunLedger] = None
    converged: bool = False

    @property
    def outer_iterations(self) -> int:
        return len(self.iterations)

    @property
    def final_r(self) -> int:
        return self.iterations[-1].r if self.iterations else 0

    @property
    def cg_iterations(self) -> int:
        return sum(record.cg_iterations for record in self.solves)

    @property
    def solve_seconds(self) -> float:
        return sum(record.solve_seconds for record in self.solves)

    def precond_seconds(self, from_outer: int = 1) -> float:
        return sum(
            record.build_seconds
            for record in self.preconditioners
            if record.outer >= from_outer
        )

    def per_point(self) -> List[Dict[str, Any]]:
        """CG iterations and timings grouped by (outer, point_index)."""
        groups: Dict[Tuple[int, int], Dict[str, Any]] = {}
        for solve in self.solves:
            key = (solve.outer, solve.point_index)
            entry = groups.setdefault(
                key,
                {
                    "outer": solve.outer,
                    "point_index": solve.point_index,
                    "cg_iterations": 0,
                    "solve_seconds": 0.0,
                    "precond_seconds": 0.0,
                },
            )
            entry["cg_iterations"] += solve.cg_iterations
            entry["solve_seconds"] += solve.solve_seconds
        for record in self.preconditioners:
            key = (record.outer, record.point_index)
            if key in groups:
                groups[key]["precond_seconds"] += record.build_seconds
        return [groups[key] for key in sorted(groups)]

    def summary(self) -> Dict[str, Any]:
        return {
            "solver": self.solver,
            "seed": self.seed,
            "converged": self.converged,
            "outer_iterations": self.outer_iterations,
            "r": self.final_r,
            "cg_iterations": self.cg_iterations,
            "solve_seconds": self.solve_seconds,
            "precond_seconds": self.precond_seconds(),
        }


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, tuple):
        return " ".join(_format(item) for item in value)
    return str(value)


def write_csv(
    path: Union[str, Path], columns: Sequence[str], rows: Sequence[Any]
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            values = row if isinstance(row, dict) else asdict(row)
            writer.writerow([_format(values[column]) for column in columns])


def write_trace(trace: RunTrace, directory: Union[str, Path]) -> Dict[str, Path]:
    """Writes the trace tables, the summary and (if present) the ledger."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    paths = {name: target / filename for name, filename in c.TRACE_FILES.items()}
    write_csv(paths["solves"], c.SOLVES_COLUMNS, trace.solves)
    write_csv(
        paths["preconditioners"], c.PRECONDITIONERS_COLUMNS, trace.preconditioners
    )
    write_csv(paths["iterations"], c.ITERATIONS_COLUMNS, trace.iterations)
    paths["summary"] = target / c.SUMMARY_FILE
    with open(paths["summary"], "w", encoding="utf-8") as f:
        for key, value in trace.summary().items():
            f.write(f"{key}={_format(value)}\n")
    if trace.ledger is not None:
        paths["ledger"] = target / c.LEDGER_FILE
        save_ledger(trace.ledger, paths["ledger"])
    logger.info(f"Wrote run trace to {target}")
    return paths


def save_ledger(ledger: RunLedger, path: Union[str, Path]) -> None:
    arrays: Dict[str, Any] = {
        "outer": np.array(ledger.outer),
        "orders": np.array([entry.order for entry in ledger.entries], dtype=np.int64),
        "point_indices": np.array(
            [entry.point_index for entry in ledger.entries], dtype=np.int64
        ),
        "points": np.array([entry.point for entry in ledger.entries], dtype=np.float64),
    }
    for index, entry in enumerate(ledger.entries):
        arrays[f"raw_{index}"] = entry.raw
        arrays[f"residual_{index}"] = entry.residual
        arrays[f"preconditioned_{index}"] = entry.preconditioned
        arrays[f"rhs_norms_{index}"] = entry.rhs_norms
    for index, block in enumerate(ledger.basis_blocks):
        arrays[f"basis_{index}"] = block
    arrays["basis_count"] = np.array(len(ledger.basis_blocks))
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_ledger(path: Union[str, Path]) -> RunLedger:
    with np.load(path) as data:
        entries = [
            LedgerEntry(
                order=int(order),
                point_index=int(point_index),
                point=float(point),
                raw=data[f"raw_{index}"],
                residual=data[f"residual_{index}"],
                preconditioned=data[f"preconditioned_{index}"],
                rhs_norms=data[f"rhs_norms_{index}"],
            )
            for index, (order, point_index, point) in enumerate(
                zip(data["orders"], data["point_indices"], data["points"])
            )
        ]
        blocks = [data[f"basis_{index}"] for index in range(int(data["basis_count"]))]
        return RunLedger(int(data["outer"]), entries, blocks)


def read_summary(path: Union[str, Path]) -> Dict[str, str]:
    result = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if "=" in line:
                key, value = line.rstrip("\n").split("=", 1)
                result[key] = value
    return result
