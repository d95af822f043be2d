import logging

import click

from airga.models import constants as c
from airga.models.beam import ModelSpec, beam_generate
from airga.models.system_io import write_system

logger = logging.getLogger(__name__)


@click.command("generate", short_help="Generate a damped beam benchmark system")
@click.option(
    "--n", "n", required=True, type=click.IntRange(min=2), help="Number of nodes"
)
@click.option("--alpha", default=c.DEFAULT_ALPHA, show_default=True, type=float)
@click.option("--beta", default=c.DEFAULT_BETA, show_default=True, type=float)
@click.option(
    "--stiffness-scale",
    default=c.DEFAULT_STIFFNESS_SCALE,
    show_default=True,
    type=float,
)
@click.option(
    "--mass-scale", default=c.DEFAULT_MASS_SCALE, show_default=True, type=float
)
@click.option(
    "--foundation",
    default=c.DEFAULT_FOUNDATION,
    show_default=True,
    type=float,
    help="Ground spring stiffness added to every node",
)
@click.option(
    "--lumped-mass", is_flag=True, help="Use the lumped tridiagonal mass matrix"
)
@click.option(
    "--output-node",
    default=-1,
    show_default=True,
    type=int,
    help="Node whose displacement is measured, negative counts from the end",
)
@click.option(
    "--benchmark",
    is_flag=True,
    help="Use the collocated solver benchmark beam, ignoring the model options",
)
@click.option(
    "--out",
    required=True,
    type=click.Path(file_okay=False),
    help="System directory",
)
def generate_command(
    n: int,
    alpha: float,
    beta: float,
    stiffness_scale: float,
    mass_scale: float,
    foundation: float,
    lumped_mass: bool,
    output_node: int,
    benchmark: bool,
    out: str,
) -> None:
    """Writes a proportionally damped beam as Matrix Market files plus a manifest

    Args:
        n (int): number of nodes
        alpha (float): mass coefficient of the damping D = alpha M + beta K
        beta (float): stiffness coefficient of the damping
        foundation (float): ground spring stiffness on every node
        benchmark (bool): generate ModelSpec.benchmark(n) instead
        out (str): directory that will hold M, K, D, F, Cp and manifest.txt
    """
    try:
        if benchmark:
            spec = ModelSpec.benchmark(n)
        else:
            spec = ModelSpec(
                n=n,
                alpha=alpha,
                beta=beta,
                stiffness_scale=stiffness_scale,
                mass_scale=mass_scale,
                foundation=foundation,
                lumped_mass=lumped_mass,
                output_node=output_node,
            )
    except ValueError as e:
        raise click.BadParameter(str(e)) from e
    write_system(out, beam_generate(spec))
    click.echo(f"Wrote beam with n={n} to {out}")
