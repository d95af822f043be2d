import numpy as np
import pytest
from scipy.sparse.linalg import LinearOperator

from airga.krylov import BreakdownError, block_solve, identity_operator, pcg_solve
from airga.linalg import DimensionError, dense_solve
from tests import random_spd


def test_identity_system() -> None:
    b = np.array([1.0, -2.0, 3.0])
    report = pcg_solve(np.eye(3), np.eye(3), b)
    np.testing.assert_allclose(report.solution, b)
    assert report.iterations == 1
    assert report.converged


def test_zero_rhs() -> None:
    report = pcg_solve(np.eye(4), None, np.zeros(4))
    np.testing.assert_array_equal(report.solution, np.zeros(4))
    assert report.iterations == 0
    assert report.converged


def test_random_spd_matches_dense() -> None:
    a = random_spd(10, seed=1)
    b = np.random.default_rng(2).standard_normal(10)
    rtol = 1e-10
    report = pcg_solve(a, None, b, rtol=rtol)
    expected = dense_solve(a, b[:, np.newaxis])[:, 0]
    assert report.converged
    bound = 10 * rtol * np.linalg.norm(expected) * np.linalg.cond(a)
    assert np.linalg.norm(report.solution - expected) <= bound
    assert np.linalg.norm(report.residual) <= rtol * np.linalg.norm(b)
    assert report.relres_history[0] == 1.0
    assert report.relres_history[-1] <= rtol


def test_galerkin_orthogonality() -> None:
    a = random_spd(30, seed=3)
    b = np.random.default_rng(4).standard_normal(30)
    report = pcg_solve(a, None, b, rtol=1e-10)
    inner = abs(float(report.solution @ report.recurrence_residual))
    assert inner <= 1e-8 * np.linalg.norm(report.solution) * np.linalg.norm(b)


def test_energy_norm_error_decreases() -> None:
    a = random_spd(12, seed=5)
    b = np.random.default_rng(6).standard_normal(12)
    exact = np.linalg.solve(a, b)
    errors = []
    for maxit in range(1, 7):
        x = pcg_solve(a, None, b, rtol=1e-14, maxit=maxit).solution
        errors.append(float(np.sqrt((exact - x) @ a @ (exact - x))))
    pairs = zip(errors, errors[1:])
    assert all(later <= earlier * (1 + 1e-10) for earlier, later in pairs)


def test_preconditioner_consistency() -> None:
    a = random_spd(15, seed=7)
    p = np.diag(1.0 / np.diag(a))
    b = np.random.default_rng(8).standard_normal(15)
    preconditioned = pcg_solve(a, p, b)
    composed_operator = LinearOperator(
        (15, 15), matvec=lambda v: a.dot(p.dot(v)), dtype=np.float64
    )
    composed = pcg_solve(composed_operator, None, b)
    np.testing.assert_array_equal(
        preconditioned.preconditioned_solution, composed.solution
    )
    np.testing.assert_allclose(
        preconditioned.solution, p @ composed.solution, rtol=1e-14
    )


def test_maxit_exhausted_is_not_an_error() -> None:
    a = random_spd(20, seed=9)
    b = np.ones(20)
    report = pcg_solve(a, None, b, rtol=1e-14, maxit=2)
    assert not report.converged
    assert report.iterations == 2


def test_breakdown() -> None:
    a = np.diag([1.0, -1.0])
    with pytest.raises(BreakdownError) as info:
        pcg_solve(a, None, np.array([1.0, 1.0]))
    assert info.value.iteration == 1


def test_dimension_mismatch() -> None:
    with pytest.raises(DimensionError):
        pcg_solve(np.eye(3), identity_operator(2), np.ones(3))


def test_block_solve_columns() -> None:
    a = random_spd(20, seed=11)
    b = np.random.default_rng(12).standard_normal((20, 2))
    b[:, 1] = 0.0
    result = block_solve(a, None, b, rtol=1e-10)
    expected = dense_solve(a, b)
    np.testing.assert_allclose(result.solution, expected, rtol=1e-8, atol=1e-12)
    np.testing.assert_array_equal(result.solution[:, 1], np.zeros(20))
    assert result.solution.shape == result.residual.shape == (20, 2)
    assert result.converged


def test_block_solve_single_column_matches_pcg() -> None:
    a = random_spd(10, seed=13)
    b = np.random.default_rng(14).standard_normal(10)
    single = pcg_solve(a, None, b)
    block = block_solve(a, None, b[:, np.newaxis])
    np.testing.assert_array_equal(block.solution[:, 0], single.solution)
    assert block.iterations == single.iterations


def test_block_solve_parallel_matches_sequential() -> None:
    a = random_spd(25, seed=15)
    b = np.random.default_rng(16).standard_normal((25, 4))
    sequential = block_solve(a, None, b)
    parallel = block_solve(a, None, b, workers=3)
    np.testing.assert_array_equal(sequential.solution, parallel.solution)
    np.testing.assert_array_equal(sequential.residual, parallel.residual)


def test_block_solve_tags_column_on_breakdown() -> None:
    a = np.diag([1.0, -1.0])
    b = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(BreakdownError) as info:
        block_solve(a, None, b)
    assert info.value.column == 1


def test_linear_operator_input() -> None:
    a = random_spd(6, seed=17)
    op = LinearOperator((6, 6), matvec=lambda v: a @ v, dtype=np.float64)
    report = pcg_solve(op, identity_operator(6), np.ones(6))
    np.testing.assert_allclose(a @ report.solution, np.ones(6), atol=1e-8)
