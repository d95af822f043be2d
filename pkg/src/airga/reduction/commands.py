import logging
from pathlib import Path
from typing import Optional

import click
import numpy as np

from airga.diagnostics.commands import grid_option
from airga.models.matrix_market import write_mm
from airga.models.system_io import read_system, write_system
from airga.reduction import constants as c
from airga.reduction.algorithm import airga_run
from airga.reduction.config import AirgaConfig, H2Method, SolverKind, default_r_max
from airga.reduction.evaluation import evaluate_reduction
from airga.reduction.moments import SolveStrategy
from airga.reduction.points import ExpansionPointSet, parse_points
from airga.reduction.trace import write_trace
from airga.spai import SpaiMode, export_chain

logger = logging.getLogger(__name__)

DEFAULT_POINTS = "{:g}:{:g}:{}".format(*c.DEFAULT_POINT_RANGE, c.DEFAULT_POINT_COUNT)
DEFAULT_GRID = "1e-2:1e4:200"


def points_option(
    ctx: click.Context, param: click.Parameter, value: str
) -> ExpansionPointSet:
    try:
        return parse_points(value)
    except ValueError as e:
        raise click.BadParameter(str(e)) from e


@click.command("reduce", short_help="Reduce a second-order system with AIRGA")
@click.option(
    "--in",
    "input_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Full system directory",
)
@click.option(
    "--solver",
    type=click.Choice([kind.value for kind in SolverKind]),
    default=SolverKind.CG_SPAI_UPDATE.value,
    show_default=True,
)
@click.option(
    "--rmax", type=click.IntRange(min=1), default=None, help="Maximum reduced order"
)
@click.option(
    "--points",
    default=DEFAULT_POINTS,
    show_default=True,
    callback=points_option,
    help="Initial expansion points a:b:l, linearly spaced",
)
@click.option("--outer-tol", default=c.DEFAULT_OUTER_TOL, show_default=True, type=float)
@click.option("--inner-tol", default=c.DEFAULT_INNER_TOL, show_default=True, type=float)
@click.option("--spai-tol", default=c.DEFAULT_SPAI_TOL, show_default=True, type=float)
@click.option(
    "--spai-max-iters", default=50, show_default=True, type=click.IntRange(min=1)
)
@click.option(
    "--spai-mode",
    type=click.Choice([mode.value for mode in SpaiMode]),
    default=SpaiMode.SEQUENTIAL.value,
    show_default=True,
)
@click.option(
    "--spai-strict",
    is_flag=True,
    help="Fail on SPAI columns above --spai-tol instead of keeping them",
)
@click.option("--cg-rtol", default=c.DEFAULT_CG_RTOL, show_default=True, type=float)
@click.option("--cg-maxit", default=None, type=click.IntRange(min=1))
@click.option(
    "--update-start", default=c.DEFAULT_UPDATE_START, show_default=True, type=int
)
@click.option("--max-outer", default=c.DEFAULT_MAX_OUTER, show_default=True, type=int)
@click.option(
    "--h2-method",
    type=click.Choice([method.value for method in H2Method]),
    default=H2Method.LYAPUNOV.value,
    show_default=True,
)
@click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=c.DEFAULT_SEED, show_default=True, type=int)
@click.option(
    "--out",
    required=True,
    type=click.Path(file_okay=False),
    help="Output directory",
)
@click.option(
    "--export-preconditioners",
    is_flag=True,
    help="Write the final preconditioner chains as Matrix Market files",
)
def reduce_command(
    input_dir: str,
    solver: str,
    rmax: Optional[int],
    points: ExpansionPointSet,
    outer_tol: float,
    inner_tol: float,
    spai_tol: float,
    spai_max_iters: int,
    spai_mode: str,
    spai_strict: bool,
    cg_rtol: float,
    cg_maxit: Optional[int],
    update_start: int,
    max_outer: int,
    h2_method: str,
    workers: int,
    seed: int,
    out: str,
    export_preconditioners: bool,
) -> None:
    """Runs AIRGA on the system in --in and writes the reduced system, the
    run trace CSVs and a summary to --out."""
    system = read_system(input_dir)
    try:
        cfg = AirgaConfig(
            r_max=rmax or default_r_max(system.n),
            initial_points=points,
            outer_tol=outer_tol,
            inner_tol=inner_tol,
            solver=SolverKind(solver),
            spai_tol=spai_tol,
            spai_max_col_iters=spai_max_iters,
            spai_mode=SpaiMode(spai_mode),
            spai_strict=spai_strict,
            cg_rtol=cg_rtol,
            cg_maxit=cg_maxit,
            update_start_iteration=update_start,
            max_outer=max_outer,
            h2_method=H2Method(h2_method),
            workers=workers,
            seed=seed,
        )
        cfg.validate_for(system.m)
    except ValueError as e:
        raise click.UsageError(str(e)) from e

    strategy = SolveStrategy(cfg)
    reduced, trace = airga_run(system, cfg, strategy)

    target = Path(out)
    reduced_dir = write_system(target / c.REDUCED_DIR, reduced.to_system())
    write_mm(reduced_dir / c.BASIS_FILE, reduced.basis.assembled)
    write_trace(trace, target)
    if export_preconditioners:
        for index, chain in strategy.chains().items():
            export_chain(chain, target / "preconditioners" / f"point-{index}")

    click.echo(
        f"r={reduced.r} outer_iterations={trace.outer_iterations} "
        f"converged={'true' if trace.converged else 'false'} seed={seed}"
    )


@click.command(
    "evaluate", short_help="Compare a reduced system against its full system"
)
@click.option(
    "--full", "full_dir", required=True, type=click.Path(exists=True, file_okay=False)
)
@click.option(
    "--reduced",
    "reduced_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
)
@click.option(
    "--grid",
    default=DEFAULT_GRID,
    show_default=True,
    callback=grid_option,
    help="Frequency grid a:b:k (log-spaced)",
)
def evaluate_command(full_dir: str, reduced_dir: str, grid: np.ndarray) -> None:
    """Prints the relative H2 error and the transfer-function error on the grid"""
    evaluation = evaluate_reduction(
        read_system(full_dir), read_system(reduced_dir), grid
    )
    click.echo(
        f"relative_h2_error={evaluation.relative_h2_error!r} "
        f"({evaluation.h2_method.value})"
    )
    if len(evaluation.pointwise) == 1:
        error = evaluation.pointwise[0]
        click.echo(f"pointwise_error={error.absolute!r} at omega={error.omega:g}")
    else:
        click.echo(f"max_pointwise_error={evaluation.max_pointwise_error!r}")
        relative = evaluation.max_relative_pointwise_error
        click.echo(f"max_relative_pointwise_error={relative!r}")
