"""
Steady-state forward and backward Kalman filters and the two-filter (RTS) smoother covariance.
"""
import logging
from typing import NamedTuple

import numpy as np

from core.exceptions import SingularCovariance
from core.filters.filter_base import Combiner, Direction, FilterRealization
from core.models.resonant import StateSpaceModel
from core.solvers import solve_care, spd_inverse, symmetrize

logger = logging.getLogger(__name__)


class KalmanDesign(NamedTuple):
    P: np.ndarray
    K: np.ndarray
    realization: FilterRealization
    residual_norm: float


def _riccati_terms(ss: StateSpaceModel):
    R_inv = 1.0 / ss.measurement_intensity
    S = ss.H.T @ ss.H * R_inv
    Q = ss.G @ ss.G.T * ss.N
    return R_inv, S, Q


def kalman_forward(ss: StateSpaceModel) -> KalmanDesign:
    """
    A P_f + P_f A^T + G N G^T - P_f H^T (J S J^T)^-1 H P_f = 0, solved as the canonical CARE on A^T.

    The filter x_hat' = (A - K_f H) x_hat + K_f theta regroups K_f H x + K_f J w as K_f theta.
    """
    R_inv, S, Q = _riccati_terms(ss)
    solution = solve_care(ss.A.T, S, Q)
    P = solution.X
    K = P @ ss.H.T * R_inv
    realization = FilterRealization(A_f=ss.A - K @ ss.H, B_f=K, direction=Direction.FORWARD, name="kalman_forward")
    logger.debug(f"Forward Kalman: P_f diag={np.diag(P)}, residual={solution.residual_norm:.2e}")
    return KalmanDesign(P, K, realization, solution.residual_norm)


def kalman_backward(ss: StateSpaceModel) -> KalmanDesign:
    """
    -A P_b - P_b A^T + G N G^T - P_b H^T (J S J^T)^-1 H P_b = 0, i.e. the forward equation for -A.

    The realization runs from T towards 0 with dynamics -A - K_b H.
    """
    R_inv, S, Q = _riccati_terms(ss)
    solution = solve_care(-ss.A.T, S, Q)
    P = solution.X
    K = P @ ss.H.T * R_inv
    realization = FilterRealization(A_f=-ss.A - K @ ss.H, B_f=K, direction=Direction.BACKWARD, name="kalman_backward")
    logger.debug(f"Backward Kalman: P_b diag={np.diag(P)}, residual={solution.residual_norm:.2e}")
    return KalmanDesign(P, K, realization, solution.residual_norm)


def _information(P: np.ndarray) -> np.ndarray:
    try:
        info, _ = spd_inverse(P)
    except np.linalg.LinAlgError as e:
        raise SingularCovariance(f"covariance is not safely invertible: {e}") from e
    return info


def rts_smoother_covariance(P_f: np.ndarray, P_b: np.ndarray) -> np.ndarray:
    """P_s = (P_f^-1 + P_b^-1)^-1."""
    info = _information(np.asarray(P_f, dtype=float)) + _information(np.asarray(P_b, dtype=float))
    return symmetrize(_information(info))


def rts_combiner(P_f: np.ndarray, P_b: np.ndarray) -> Combiner:
    """Two-filter weights P_s P_f^-1 and P_s P_b^-1."""
    return Combiner.from_information(_information(P_f), _information(P_b))
