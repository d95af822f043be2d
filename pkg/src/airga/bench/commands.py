import logging
from dataclasses import replace
from typing import List, Optional

import click

from airga.bench.runner import MODELS, run_bench, write_bench
from airga.reduction import constants as c
from airga.reduction.config import AirgaConfig, SolverKind
from airga.reduction.points import parse_points

logger = logging.getLogger(__name__)


def _int_list(ctx: click.Context, param: click.Parameter, value: str) -> List[int]:
    try:
        sizes = [int(item) for item in value.split(",") if item.strip()]
    except ValueError as e:
        raise click.BadParameter(
            f"Expected comma-separated integers, got {value!r}"
        ) from e
    if not sizes or min(sizes) < 2:
        raise click.BadParameter(f"Sizes must be integers >= 2, got {value!r}")
    return sizes


def _solver_list(
    ctx: click.Context, param: click.Parameter, value: str
) -> List[SolverKind]:
    try:
        return [SolverKind(item.strip()) for item in value.split(",") if item.strip()]
    except ValueError as e:
        raise click.BadParameter(str(e)) from e


@click.command("bench", short_help="Time solver strategies over model sizes")
@click.option("--sizes", default="200,2000", show_default=True, callback=_int_list)
@click.option(
    "--solvers",
    default="cg-spai,cg-spai-update",
    show_default=True,
    callback=_solver_list,
    help="Comma-separated solver strategies",
)
@click.option(
    "--model",
    type=click.Choice(sorted(MODELS)),
    default="benchmark",
    show_default=True,
    help="Beam family: the collocated benchmark preset or the plain chain",
)
@click.option("--repeats", default=3, show_default=True, type=click.IntRange(min=1))
@click.option("--rmax", type=click.IntRange(min=1), default=None)
@click.option("--points", default=None, help="Initial expansion points a:b:l")
@click.option("--max-outer", default=c.DEFAULT_MAX_OUTER, show_default=True, type=int)
@click.option(
    "--update-start", default=c.DEFAULT_UPDATE_START, show_default=True, type=int
)
@click.option("--seed", default=c.DEFAULT_SEED, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def bench_command(
    sizes: List[int],
    solvers: List[SolverKind],
    model: str,
    repeats: int,
    rmax: Optional[int],
    points: Optional[str],
    max_outer: int,
    update_start: int,
    seed: int,
    out: str,
) -> None:
    """Runs each (size, solver) cell --repeats times and writes per-iteration
    and median totals tables. Failed runs are recorded per cell."""
    try:
        base = AirgaConfig(
            max_outer=max_outer, update_start_iteration=update_start, seed=seed
        )
        if points is not None:
            base = replace(base, initial_points=parse_points(points))
    except ValueError as e:
        raise click.UsageError(str(e)) from e
    result = run_bench(sizes, solvers, repeats, base, rmax, MODELS[model])
    paths = write_bench(result, out)
    for row in result.totals_rows():
        click.echo(
            f"n={row['size']} {row['solver']}: {row['status']}, r={row['r']}, "
            f"precond {row['precond_seconds']:.3f}s"
        )
    logger.info(f"Wrote {paths['totals']}")
