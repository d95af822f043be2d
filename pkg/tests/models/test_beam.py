import numpy as np
import pytest

from airga.linalg import frob_norm, sp_add_scaled
from airga.models.beam import ModelSpec, beam_generate


def test_two_node_beam() -> None:
    system = beam_generate(ModelSpec(n=2))
    np.testing.assert_array_equal(system.K.toarray(), [[2.0, -1.0], [-1.0, 2.0]])
    np.testing.assert_allclose(np.linalg.eigvalsh(system.K.toarray()), [1.0, 3.0])
    np.testing.assert_array_equal(system.M.toarray(), np.eye(2))


def test_damping_is_proportional() -> None:
    spec = ModelSpec(n=50, alpha=0.2, beta=0.3, lumped_mass=True)
    system = beam_generate(spec)
    assert system.proportional
    expected = sp_add_scaled(system.M, system.K, 0.2, 0.3)
    difference = sp_add_scaled(system.D, expected, 1.0, -1.0)
    assert frob_norm(difference) == 0.0


@pytest.mark.parametrize("n", [2, 10, 100, 2000])
def test_matrices_are_spd(n: int) -> None:
    system = beam_generate(ModelSpec(n=n, lumped_mass=n % 20 == 0))
    assert system.K.nnz == 3 * n - 2
    if n <= 100:
        for matrix in (system.M, system.D, system.K):
            np.linalg.cholesky(matrix.toarray())
    else:
        # tridiagonal: positive definite iff all LDL pivots are positive
        diagonal = system.K.diagonal()
        off = system.K.diagonal(1)
        pivot = diagonal[0]
        for i in range(1, n):
            pivot = diagonal[i] - off[i - 1] ** 2 / pivot
            assert pivot > 0.0


def test_input_and_output_vectors() -> None:
    system = beam_generate(ModelSpec(n=5))
    np.testing.assert_array_equal(system.F[:, 0], [1.0, 0.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(system.Cp[0], [0.0, 0.0, 0.0, 0.0, 1.0])
    assert not system.has_velocity_output
    assert (system.m, system.q) == (1, 1)


def test_lumped_mass() -> None:
    system = beam_generate(ModelSpec(n=3, lumped_mass=True, mass_scale=6.0))
    np.testing.assert_allclose(
        system.M.toarray(), [[4.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 4.0]]
    )



def test_foundation_shifts_the_stiffness_diagonal() -> None:
    plain = beam_generate(ModelSpec(n=6))
    supported = beam_generate(ModelSpec(n=6, foundation=0.25))
    np.testing.assert_array_equal(
        supported.K.toarray(), plain.K.toarray() + 0.25 * np.eye(6)
    )
    assert supported.K.nnz == plain.K.nnz


def test_benchmark_beam_is_collocated_and_well_conditioned() -> None:
    system = beam_generate(ModelSpec.benchmark(40))
    np.testing.assert_array_equal(system.Cp[0], system.F[:, 0])
    assert (system.alpha, system.beta) == (0.5, 0.5)
    eigenvalues = np.linalg.eigvalsh(system.K.toarray())
    assert eigenvalues.min() > 1.0
    assert eigenvalues.max() < 3.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 1},
        {"n": 4, "mass_scale": 0.0},
        {"n": 4, "alpha": -0.1},
        {"n": 4, "input_node": 4},
        {"n": 4, "foundation": -1.0},
    ],
)
def test_invalid_model_spec(kwargs: dict) -> None:  # type: ignore[type-arg]
    with pytest.raises(ValueError):
        ModelSpec(**kwargs)
