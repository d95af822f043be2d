import os
import unittest
from typing import Callable, List, Sequence

import numpy as np
import scipy.sparse
from click import Command, Group
from click.testing import CliRunner, Result

from airga.commands import airga_group
from airga.linalg import DenseMatrix, SparseMatrix, as_sparse
from airga.models.beam import ModelSpec, beam_generate
from airga.reduction.system import SecondOrderSystem


class TestData:
    def __init__(self, path: str) -> None:
        self.directory = os.path.dirname(os.path.abspath(path))

    def get_path(self, rel_path: str) -> str:
        return os.path.join(self.directory, rel_path)


test_data = TestData(__file__)


class CliTestCase(unittest.TestCase):
    def create_subcommand_functions(self) -> List[Callable[[Group], Command]]:
        raise NotImplementedError

    def setUp(self) -> None:
        self.cli = airga_group()
        for create_subcommand in self.create_subcommand_functions():
            create_subcommand(self.cli)

    def run_command(self, cmd: Sequence[str]) -> Result:
        return CliRunner().invoke(self.cli, list(cmd), catch_exceptions=False)


def beam(n: int, **kwargs: float) -> SecondOrderSystem:
    return beam_generate(ModelSpec(n=n, **kwargs))  # type: ignore[arg-type]


def random_spd(n: int, seed: int) -> DenseMatrix:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


def random_sparse(n: int, density: float, seed: int) -> SparseMatrix:
    rng = np.random.default_rng(seed)
    matrix = scipy.sparse.random(
        n, n, density=density, random_state=rng, data_rvs=rng.standard_normal
    )
    return as_sparse(matrix)


def random_sparse_spd(n: int, density: float, seed: int) -> SparseMatrix:
    """Diagonally dominant symmetric sparse matrix."""
    a = random_sparse(n, density, seed)
    symmetric = a + a.T
    shift = np.abs(symmetric).sum(axis=1).max() + 1.0
    return as_sparse(symmetric + shift * scipy.sparse.identity(n))
