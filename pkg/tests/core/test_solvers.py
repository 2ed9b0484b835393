import numpy as np
import pytest
from scipy import linalg

from core.exceptions import ImaginaryAxisEigenvalue, UnstableMatrix
from core.models import build_process
from core.solvers import is_hurwitz, is_psd, psd_order, relative_error, solve_care, solve_lyapunov, spd_inverse


def test_scalar_care():
    assert solve_care([[0.0]], [[1.0]], [[1.0]]).X[0, 0] == pytest.approx(1.0, rel=1e-12)
    # -2x - x^2 + 3 = 0 has roots 1 and -3; only x = 1 stabilizes a - s x
    solution = solve_care([[-1.0]], [[1.0]], [[3.0]])
    assert solution.X[0, 0] == pytest.approx(1.0, rel=1e-12)
    assert solution.closed_loop_stable


def test_care_matches_scipy():
    A = np.array([[0.0, 1.0], [-2.0, -3.0]])
    B = np.array([[0.0], [1.0]])
    Q = np.eye(2)
    expected = linalg.solve_continuous_are(A, B, Q, np.eye(1))
    solution = solve_care(A, B @ B.T, Q)
    np.testing.assert_allclose(solution.X, expected, rtol=1e-9)
    assert solution.residual_norm < 1e-8
    assert is_hurwitz(A - B @ B.T @ solution.X)


def test_care_without_quadratic_term_is_a_lyapunov_equation():
    A = np.array([[0.0, 1.0], [-2.0, -3.0]])
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    solution = solve_care(A, np.zeros((2, 2)), Q)
    np.testing.assert_allclose(solution.X, solve_lyapunov(A.T, Q), rtol=1e-10, atol=1e-12)


def test_care_imaginary_axis():
    with pytest.raises(ImaginaryAxisEigenvalue):
        solve_care([[0.0, 1.0], [-1.0, 0.0]], np.zeros((2, 2)), np.zeros((2, 2)))


def test_care_rejects_bad_shapes():
    with pytest.raises(ValueError):
        solve_care(np.eye(2), np.eye(3), np.eye(2))


def test_lyapunov_scalar():
    assert solve_lyapunov([[-1.0]], [[2.0]])[0, 0] == pytest.approx(1.0)


def test_lyapunov_identity_and_scaling():
    np.testing.assert_allclose(solve_lyapunov(-np.eye(2), 2 * np.eye(2)), np.eye(2), atol=1e-14)
    A = np.array([[0.0, 1.0], [-4.0e4, -40.0]])
    Q = np.diag([0.0, 9.0e8])
    X = solve_lyapunov(A, Q)
    np.testing.assert_allclose(solve_lyapunov(A, 7.5 * Q), 7.5 * X, rtol=1e-10, atol=1e-12 * np.abs(X).max())


def test_lyapunov_resonant_covariance(params):
    A, G = build_process(params)
    Sigma = solve_lyapunov(A, G @ G.T)
    w, z, k = params.omega_r, params.zeta, params.kappa
    assert Sigma[0, 0] == pytest.approx(k ** 2 / (4 * z * w ** 3), rel=1e-9)
    assert Sigma[1, 1] == pytest.approx(k ** 2 / (4 * z * w), rel=1e-9)
    assert abs(Sigma[0, 1]) < 1e-9 * np.sqrt(Sigma[0, 0] * Sigma[1, 1])


def test_lyapunov_needs_hurwitz():
    with pytest.raises(UnstableMatrix):
        solve_lyapunov([[1.0]], [[1.0]])
    with pytest.raises(UnstableMatrix):
        solve_lyapunov([[0.0, 1.0], [-1.0, 0.0]], np.eye(2))


def test_hurwitz_and_psd_helpers():
    assert is_hurwitz(np.diag([-1.0, -2.0]))
    assert not is_hurwitz(np.diag([-1.0, 0.0]))
    assert is_psd(np.diag([1.0, 0.0]))
    assert not is_psd(np.diag([1.0, -1.0]))
    assert psd_order(np.eye(2), 2 * np.eye(2))
    assert not psd_order(2 * np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        is_hurwitz([[np.nan]])


def test_spd_inverse():
    P = np.array([[4.0, 1.0], [1.0, 3.0]])
    inverse, condition = spd_inverse(P)
    np.testing.assert_allclose(inverse @ P, np.eye(2), atol=1e-12)
    assert condition > 1
    with pytest.raises(np.linalg.LinAlgError):
        spd_inverse(np.diag([1.0, 1e-14]))


def test_relative_error():
    assert relative_error(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
