import logging
from typing import Any

import click

from airga import __version__
from airga.bench.commands import bench_command
from airga.diagnostics.commands import diagnose_command
from airga.linalg import AirgaError
from airga.models.commands import generate_command
from airga.reduction.commands import evaluate_command, reduce_command

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


class AirgaGroup(click.Group):
    """Reports library errors as ``<command>: <message>`` with exit code 1."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except AirgaError as e:
            raise click.ClickException(f"{ctx.invoked_subcommand}: {e}") from e


def airga_group() -> click.Group:
    @click.group("airga", cls=AirgaGroup)
    @click.option("-v", "--verbose", count=True, help="-v for progress, -vv for detail")
    @click.version_option(version=__version__)
    def group(verbose: int) -> None:
        """Model order reduction of second-order systems with AIRGA"""
        logging.basicConfig(
            level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
            format="%(levelname)s %(name)s: %(message)s",
        )

    return group


def create_airga_command(cli: click.Group) -> click.Group:
    cli.add_command(generate_command)
    cli.add_command(reduce_command)
    cli.add_command(evaluate_command)
    cli.add_command(diagnose_command)
    cli.add_command(bench_command)

    return cli


airga_cmd = create_airga_command(airga_group())
