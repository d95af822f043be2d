"""One-dimensional beam (spring chain) benchmark with proportional damping.

K is stiffness_scale * tridiag(-1, 2, -1) plus foundation * I, the springs
tying every node to the ground. M is either mass_scale * I or the
lumped tridiag(1/6, 2/3, 1/6) scaled by mass_scale. D = alpha M + beta K. The
input acts on the first node and the output reads the displacement of the
last node unless other nodes are chosen.

The default far-end chain is lightly damped and hard to reduce. The
``ModelSpec.benchmark`` preset reads the output at the input node, adds a
unit foundation and damps heavily, which keeps K(s) well conditioned at the
expansion points and the transfer function reducible.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from airga.linalg import SparseMatrix, as_sparse
from airga.models import constants as c
from airga.reduction.system import SecondOrderSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelSpec:
    n: int
    alpha: float = c.DEFAULT_ALPHA
    beta: float = c.DEFAULT_BETA
    stiffness_scale: float = c.DEFAULT_STIFFNESS_SCALE
    mass_scale: float = c.DEFAULT_MASS_SCALE
    foundation: float = c.DEFAULT_FOUNDATION
    lumped_mass: bool = False
    input_node: int = 0
    output_node: int = -1

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"A beam needs at least 2 nodes, got n={self.n}")
        if self.stiffness_scale <= 0 or self.mass_scale <= 0:
            raise ValueError("Stiffness and mass scales must be positive")
        if self.foundation < 0:
            raise ValueError(
                f"Foundation stiffness must be nonnegative, got {self.foundation}"
            )
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("Damping coefficients must be nonnegative")
        for node in (self.input_node, self.output_node):
            if not -self.n <= node < self.n:
                raise ValueError(f"Node {node} outside a beam with {self.n} nodes")

    @classmethod
    def benchmark(cls, n: int) -> "ModelSpec":
        """The collocated, foundation supported beam the solver benchmarks use."""
        return cls(
            n=n,
            alpha=c.BENCHMARK_DAMPING,
            beta=c.BENCHMARK_DAMPING,
            stiffness_scale=c.BENCHMARK_STIFFNESS_SCALE,
            foundation=c.BENCHMARK_FOUNDATION,
            output_node=0,
        )


def tridiagonal(n: int, lower: float, diagonal: float, upper: float) -> SparseMatrix:
    return as_sparse(
        scipy.sparse.diags(
            [np.full(n - 1, lower), np.full(n, diagonal), np.full(n - 1, upper)],
            offsets=[-1, 0, 1],
            format="csr",
        )
    )


def beam_generate(spec: ModelSpec) -> SecondOrderSystem:
    """Generates the beam system described by ``spec``."""
    n = spec.n
    stiffness = as_sparse(spec.stiffness_scale * tridiagonal(n, -1.0, 2.0, -1.0))
    if spec.foundation > 0:
        stiffness = as_sparse(
            stiffness + spec.foundation * scipy.sparse.identity(n, format="csr")
        )
    if spec.lumped_mass:
        mass = as_sparse(
            spec.mass_scale * tridiagonal(n, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0)
        )
    else:
        mass = as_sparse(spec.mass_scale * scipy.sparse.identity(n, format="csr"))
    inputs = np.zeros((n, 1))
    inputs[spec.input_node, 0] = 1.0
    outputs = np.zeros((1, n))
    outputs[0, spec.output_node] = 1.0
    system = SecondOrderSystem.proportionally_damped(
        mass, stiffness, inputs, outputs, spec.alpha, spec.beta
    )
    logger.debug(f"Generated beam with n={n}, nnz(K)={stiffness.nnz}")
    return system
