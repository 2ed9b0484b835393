"""
Dense kernels for the small symmetric matrix equations behind the estimators.

Every Riccati equation in the library is mapped onto the single canonical form

    A^T X + X A - X S X + Q = 0

and solved for the stabilizing solution (A - S X Hurwitz). The mappings used by the filters are:

    forward Kalman   A -> A^T,  S = H^T (J S J^T)^-1 H,  Q = G N G^T,           X = P_f
    backward Kalman  A -> -A^T, S = H^T (J S J^T)^-1 H,  Q = G N G^T,           X = P_b
    robust forward   A -> -A,   S = G Q_iqc^-1 G^T,      Q = H^T R H - K^T K,   X = Y
    robust backward  A -> A,    S = G Q_iqc^-1 G^T,      Q = H^T R H - K^T K,   X = Z

Steady-state covariances come from A X + X A^T + Q = 0 (Bartels-Stewart on a balanced copy of A).
"""
import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from scipy import linalg

from core.exceptions import ImaginaryAxisEigenvalue, NonConvergence, UnstableMatrix

logger = logging.getLogger(__name__)

CARE_RESIDUAL_TOL = 1e-8
IMAGINARY_AXIS_TOL = 1e-9
LYAPUNOV_RESIDUAL_TOL = 1e-10
LYAPUNOV_RESIDUAL_HARD_TOL = 1e-8
HURWITZ_MARGIN = 1e-10
PSD_TOL = 1e-10


class RiccatiSolution(BaseModel):
    X: np.ndarray
    residual_norm: float
    closed_loop_stable: bool

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False


def symmetrize(X: np.ndarray) -> np.ndarray:
    return (X + X.T) / 2


def is_hurwitz(A: np.ndarray, margin: float = 0.0) -> bool:
    """True iff every eigenvalue of A has real part strictly below -margin."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.all(np.isfinite(A)):
        raise ValueError("is_hurwitz needs a matrix with finite entries")
    return bool(np.all(np.linalg.eigvals(A).real < -margin))


def care_residual(A: np.ndarray, S: np.ndarray, Q: np.ndarray, X: np.ndarray) -> float:
    """Frobenius norm of A^T X + X A - X S X + Q scaled by ||Q|| + ||X||^2 ||S||."""
    residual = A.T @ X + X @ A - X @ S @ X + Q
    scale = np.linalg.norm(Q) + np.linalg.norm(X) ** 2 * np.linalg.norm(S)
    return float(np.linalg.norm(residual) / (scale if scale > 0 else 1.0))


def lyapunov_residual(A: np.ndarray, X: np.ndarray, Q: np.ndarray) -> float:
    """Frobenius norm of A X + X A^T + Q relative to ||Q||."""
    residual = A @ X + X @ A.T + Q
    scale = np.linalg.norm(Q)
    return float(np.linalg.norm(residual) / (scale if scale > 0 else 1.0))


def _symplectic_scaling(H: np.ndarray, n: int) -> np.ndarray:
    # diag(D, D^-1) keeps the Hamiltonian structure; powers of two avoid rounding
    M = np.abs(H)
    M[np.diag_indices_from(M)] = 0.0
    _, (sca, _) = linalg.matrix_balance(M, permute=False, separate=True)
    if np.allclose(sca, np.ones_like(sca)):
        return np.ones(2 * n)
    sca = np.log2(sca)
    s = np.round((sca[n:] - sca[:n]) / 2)
    return 2.0 ** np.r_[s, -s]


def _as_square(name: str, M: np.ndarray, n: int) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def solve_care(A: np.ndarray, S: np.ndarray, Q: np.ndarray, balanced: bool = True) -> RiccatiSolution:
    """
    Stabilizing solution of A^T X + X A - X S X + Q = 0.

    The stable invariant subspace of the Hamiltonian [[A, -S], [-Q, -A^T]] is extracted from an ordered
    real Schur form (stable eigenvalues first); X = U21 U11^-1.

    Raises:
        ImaginaryAxisEigenvalue: the Hamiltonian has eigenvalues within 1e-9 ||A|| of the imaginary axis.
        NonConvergence: the eigensolver failed, U11 is singular, or the returned X misses the residual or
            stability certificate.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    A = _as_square("A", A, n)
    S = _as_square("S", S, n)
    Q = _as_square("Q", Q, n)

    H = np.block([[A, -S], [-Q, -A.T]])
    eigenvalues = np.linalg.eigvals(H)
    axis_tol = IMAGINARY_AXIS_TOL * max(np.linalg.norm(A), np.finfo(float).tiny)
    if np.min(np.abs(eigenvalues.real)) < axis_tol:
        raise ImaginaryAxisEigenvalue(
            f"Hamiltonian eigenvalue within {axis_tol:.3g} of the imaginary axis; no stabilizing solution")

    sca = _symplectic_scaling(H, n) if balanced else np.ones(2 * n)
    H_scaled = H * (sca[:, None] / sca[None, :])
    try:
        _, U, sdim = linalg.schur(H_scaled, output="real", sort="lhp")
    except (linalg.LinAlgError, ValueError) as e:
        raise NonConvergence(f"Ordered Schur decomposition failed: {e}") from e
    if sdim != n:
        raise ImaginaryAxisEigenvalue(f"Expected {n} stable Hamiltonian eigenvalues, found {sdim}")

    U11 = U[:n, :n]
    U21 = U[n:, :n]
    if np.linalg.cond(U11) > 1 / np.finfo(float).eps:
        raise NonConvergence("Stable subspace basis is singular; (A, S) is not stabilizable")
    X = np.linalg.solve(U11.T, U21.T).T
    X = symmetrize(X * (sca[:n, None] * sca[None, :n]))

    residual = care_residual(A, S, Q, X)
    stable = is_hurwitz(A - S @ X)
    logger.debug(f"CARE n={n}: residual={residual:.3e}, closed loop stable={stable}")
    if residual >= CARE_RESIDUAL_TOL:
        raise NonConvergence(f"CARE residual {residual:.3e} exceeds {CARE_RESIDUAL_TOL:g}")
    if not stable:
        raise NonConvergence("CARE solution does not stabilize A - S X")
    return RiccatiSolution(X=X, residual_norm=residual, closed_loop_stable=stable)


def solve_lyapunov(A: np.ndarray, Q: np.ndarray, balanced: bool = True) -> np.ndarray:
    """
    Steady-state covariance X solving A X + X A^T + Q = 0 for Hurwitz A.

    A diagonal similarity T (scipy's matrix_balance) is applied first, X = T Y T with
    B Y + Y B^T + T^-1 Q T^-1 = 0, so that entries spanning many decades keep their relative accuracy.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    A = _as_square("A", A, n)
    Q = _as_square("Q", Q, n)
    if not is_hurwitz(A, margin=HURWITZ_MARGIN * max(np.linalg.norm(A), 1.0)):
        raise UnstableMatrix("Lyapunov equation needs a Hurwitz matrix; steady state does not exist")

    if balanced:
        B, (scale, _) = linalg.matrix_balance(A, permute=False, separate=True)
    else:
        B, scale = A, np.ones(n)
    Q_scaled = Q / np.outer(scale, scale)
    Y = linalg.solve_continuous_lyapunov(B, -Q_scaled)
    X = symmetrize(Y * np.outer(scale, scale))

    residual = lyapunov_residual(A, X, Q)
    if residual >= LYAPUNOV_RESIDUAL_HARD_TOL:
        raise NonConvergence(f"Lyapunov residual {residual:.3e} exceeds {LYAPUNOV_RESIDUAL_HARD_TOL:g}")
    if residual >= LYAPUNOV_RESIDUAL_TOL:
        logger.warning(f"Lyapunov residual {residual:.3e} above {LYAPUNOV_RESIDUAL_TOL:g}")
    return X


def is_psd(X: np.ndarray, rtol: float = PSD_TOL) -> bool:
    X = symmetrize(np.atleast_2d(X))
    eigenvalues = np.linalg.eigvalsh(X)
    return bool(eigenvalues.min() >= -rtol * max(np.abs(eigenvalues).max(), np.finfo(float).tiny))


def psd_order(X: np.ndarray, Y: np.ndarray, rtol: float = PSD_TOL) -> bool:
    """True iff X <= Y in the positive semidefinite order (Y - X is PSD)."""
    return is_psd(np.asarray(Y) - np.asarray(X), rtol=rtol)


def relative_error(X: np.ndarray, reference: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(X) - np.asarray(reference)) / np.linalg.norm(reference))


def spd_inverse(P: np.ndarray, max_condition: float = 1e12) -> Tuple[np.ndarray, float]:
    """Inverse of a symmetric positive definite matrix through its Cholesky factor, with its condition number."""
    P = symmetrize(np.atleast_2d(np.asarray(P, dtype=float)))
    condition = float(np.linalg.cond(P))
    if not np.isfinite(condition) or condition > max_condition:
        raise np.linalg.LinAlgError(f"condition number {condition:.3e} exceeds {max_condition:.1e}")
    factor = linalg.cho_factor(P)
    return symmetrize(linalg.cho_solve(factor, np.eye(P.shape[0]))), condition
