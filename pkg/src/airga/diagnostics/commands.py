import logging
from pathlib import Path
from typing import Optional

import click
import numpy as np

from airga.diagnostics.ledger import DEFAULT_MAX_DIM, Construction
from airga.diagnostics.report import diagnose, write_report
from airga.diagnostics.stability import parse_grid
from airga.models.system_io import read_system
from airga.reduction import constants as c
from airga.reduction.trace import load_ledger

logger = logging.getLogger(__name__)


def grid_option(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[np.ndarray]:
    if value is None:
        return None
    try:
        return parse_grid(value)
    except ValueError as e:
        raise click.BadParameter(str(e)) from e


@click.command("diagnose", short_help="Check stability conditions of an inexact run")
@click.option(
    "--trace",
    "trace_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Output directory of an iterative reduce run",
)
@click.option(
    "--system",
    "system_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Full system directory",
)
@click.option(
    "--grid",
    default=None,
    callback=grid_option,
    help="Frequency grid a:b:k (log-spaced)",
)
@click.option(
    "--construction",
    type=click.Choice([choice.value for choice in Construction]),
    default=Construction.MIN_NORM_PSEUDOINVERSE.value,
    show_default=True,
)
@click.option("--max-dim", default=DEFAULT_MAX_DIM, show_default=True, type=int)
@click.option("--seed", default=c.DEFAULT_SEED, show_default=True, type=int)
@click.option("--out", default=None, help="Report directory (defaults to --trace)")
def diagnose_command(
    trace_dir: str,
    system_dir: str,
    grid: Optional[np.ndarray],
    construction: str,
    max_dim: int,
    seed: int,
    out: Optional[str],
) -> None:
    """Builds the residual ledger of a cg run, forms the perturbation Z and
    evaluates the stability condition and H2 error bound."""
    ledger_path = Path(trace_dir) / c.LEDGER_FILE
    if not ledger_path.is_file():
        raise click.ClickException(
            f"diagnose: no residual ledger in {trace_dir} "
            "(direct-solver runs record none)"
        )
    system = read_system(system_dir)
    try:
        report = diagnose(
            system,
            load_ledger(ledger_path),
            grid,
            Construction(construction),
            max_dim,
            seed,
        )
    except ValueError as e:
        raise click.ClickException(f"diagnose: {e}") from e
    for key, value in report.summary().items():
        click.echo(f"{key}: {value}")
    click.echo("orthogonality:")
    click.echo(np.array2string(report.orthogonality.basis_matrix, precision=3))
    paths = write_report(report, out or trace_dir)
    logger.info(f"Wrote diagnostics to {paths['report'].parent}")
