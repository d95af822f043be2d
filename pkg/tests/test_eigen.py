import numpy as np
import pytest

from airga.eigen import (
    StabilityError,
    companion,
    lyap_solve,
    quad_eig,
    quad_residual,
    real_schur,
    schur_eigenvalues,
    sort_eigenvalues,
)
from airga.linalg import SingularMatrixError
from tests import random_spd


def test_real_schur_diagonal() -> None:
    a = np.diag([3.0, -1.0, 2.0])
    q, t = real_schur(a)
    np.testing.assert_allclose(sorted(np.diag(t)), [-1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(q) @ np.ones(3), np.ones(3), atol=1e-12)


def test_real_schur_rotation() -> None:
    _, t = real_schur(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert t[1, 0] != 0.0
    values = schur_eigenvalues(t)
    np.testing.assert_allclose(sort_eigenvalues(values), [-1j, 1j], atol=1e-14)


def test_real_schur_reconstruction() -> None:
    a = np.random.default_rng(10).standard_normal((8, 8))
    q, t = real_schur(a)
    assert np.linalg.norm(q @ t @ q.T - a) < 1e-10 * np.linalg.norm(a)
    assert np.linalg.norm(q.T @ q - np.eye(8)) < 1e-10
    assert np.allclose(np.tril(t, -2), 0.0)


def test_quad_eig_scalar() -> None:
    spectrum = quad_eig(np.array([[1.0]]), np.array([[3.0]]), np.array([[2.0]]))
    np.testing.assert_allclose(spectrum.eigenvalues, [-2.0, -1.0], atol=1e-12)
    assert len(spectrum) == 2


def test_quad_eig_undamped() -> None:
    spectrum = quad_eig(np.eye(2), np.zeros((2, 2)), np.diag([1.0, 4.0]))
    np.testing.assert_allclose(
        spectrum.eigenvalues, [-2j, -1j, 1j, 2j], atol=1e-12
    )


def test_quad_eig_residuals_random_spd() -> None:
    for seed in range(3):
        mh, dh, kh = (random_spd(6, seed * 3 + k) for k in range(3))
        spectrum = quad_eig(mh, dh, kh)
        assert len(spectrum) == 12
        for value in spectrum.eigenvalues:
            assert quad_residual(mh, dh, kh, value) <= 1e-8


def test_quad_eig_matches_companion_eigenvalues() -> None:
    mh, dh, kh = random_spd(4, 20), random_spd(4, 21), random_spd(4, 22)
    spectrum = quad_eig(mh, dh, kh)
    dense = np.linalg.eigvals(companion(mh, dh, kh)).astype(complex)
    expected = sort_eigenvalues(dense)
    np.testing.assert_allclose(spectrum.eigenvalues, expected, rtol=1e-8, atol=1e-10)


def test_quad_eig_conjugate_closure() -> None:
    spectrum = quad_eig(np.eye(3), 0.1 * np.eye(3), np.diag([1.0, 2.0, 3.0]))
    values = set(spectrum.eigenvalues.tolist())
    assert values == set(np.conj(spectrum.eigenvalues).tolist())


def test_quad_eig_singular_mass() -> None:
    with pytest.raises(SingularMatrixError):
        quad_eig(np.zeros((2, 2)), np.eye(2), np.eye(2))


def test_lyap_solve_small() -> None:
    scalar = lyap_solve(np.array([[-1.0]]), np.array([[1.0]]))
    np.testing.assert_allclose(scalar, [[0.5]])
    np.testing.assert_allclose(lyap_solve(-np.eye(2), np.eye(2)), 0.5 * np.eye(2))


def test_lyap_solve_random_stable() -> None:
    rng = np.random.default_rng(30)
    a = rng.standard_normal((6, 6))
    a -= (np.max(np.linalg.eigvals(a).real) + 1.0) * np.eye(6)
    b = rng.standard_normal((6, 2))
    w = b @ b.T
    p = lyap_solve(a, w)
    assert np.linalg.norm(a @ p + p @ a.T + w) <= 1e-9 * np.linalg.norm(w)
    assert np.linalg.norm(p - p.T) <= 1e-12 * np.linalg.norm(p)
    np.linalg.cholesky(p + 1e-12 * np.linalg.norm(p) * np.eye(6))


def test_lyap_solve_not_hurwitz() -> None:
    with pytest.raises(StabilityError) as info:
        lyap_solve(np.diag([-1.0, 0.5]), np.eye(2))
    np.testing.assert_allclose(info.value.eigenvalues, [0.5])
