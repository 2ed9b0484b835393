"""
Robust forward/backward filters and fixed-interval smoother for x' = (A + G Delta K) x + G v under the
integral quadratic constraint with uncertainty output z = K x (Q_iqc = R_iqc = 1).

    forward   Y A + A^T Y + Y G Q^-1 G^T Y + K^T K - H^T R H = 0,   eta' = -(A + G Q^-1 G^T Y)^T eta + H^T R theta
    backward  Z A + A^T Z - Z G Q^-1 G^T Z - K^T K + H^T R H = 0,   xi'  = (A - G Q^-1 G^T Z)^T xi + H^T R theta  (reverse time)

x_hat_f = Y^-1 eta, x_hat_b = Z^-1 xi and the smoother is (Y + Z)^-1 (eta + xi). The backward variable is carried
with the sign that makes the smoother reduce to the two-filter RTS combination when K = 0.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel

from core.exceptions import InfeasibleUncertaintyLevel, SingularMatrixError, SingularY, SingularZ, SolverError
from core.filters.filter_base import Combiner, Direction, FilterRealization
from core.models.resonant import StateSpaceModel
from core.models.uncertainty import UncertaintyStructure
from core.solvers import solve_care

logger = logging.getLogger(__name__)

Q_IQC = 1.0
R_IQC = 1.0
FEASIBILITY_BISECTION_STEPS = 8
MAX_INFORMATION_CONDITION = 1e12


class RobustFilterDesign(NamedTuple):
    information: np.ndarray
    realization: FilterRealization
    residual_norm: float


class RobustDesign(BaseModel):
    Y: np.ndarray
    Z: np.ndarray
    Q_iqc: float = Q_IQC
    R_iqc: float = R_IQC
    forward: FilterRealization
    backward: FilterRealization
    combiner: Combiner
    residual_forward: float
    residual_backward: float

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False


def _riccati_terms(ss: StateSpaceModel, K: np.ndarray):
    S = ss.G @ ss.G.T / Q_IQC
    Q = ss.H.T @ ss.H * R_IQC - K.T @ K
    return S, Q


def _check_information(M: np.ndarray, error: type, label: str, mu: Optional[float]):
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) > MAX_INFORMATION_CONDITION:
        raise error(f"{label} is singular or too ill-conditioned to invert")
    if np.linalg.eigvalsh(M).min() <= 0:
        raise InfeasibleUncertaintyLevel(mu if mu is not None else float("nan"), reason=f"{label} is not positive definite")


def robust_forward(ss: StateSpaceModel, K: np.ndarray, mu: Optional[float] = None) -> RobustFilterDesign:
    """
    Forward robust filter, solved as the canonical CARE with A -> -A and X = Y so that the stabilizing root
    makes the eta dynamics -(A + G Q^-1 G^T Y)^T Hurwitz. Returned in x_hat coordinates.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    S, Q = _riccati_terms(ss, K)
    try:
        solution = solve_care(-ss.A, S, Q)
    except SolverError as e:
        raise InfeasibleUncertaintyLevel(mu if mu is not None else float("nan"), reason=f"forward Riccati: {e}") from e
    Y = solution.X
    _check_information(Y, SingularY, "Y", mu)
    eta_dynamics = -(ss.A + S @ Y).T
    realization = FilterRealization(A_f=eta_dynamics, B_f=ss.H.T * R_IQC, direction=Direction.FORWARD,
                                    state_map=np.linalg.inv(Y), name="robust_forward").estimate_form()
    return RobustFilterDesign(Y, realization, solution.residual_norm)


def robust_backward(ss: StateSpaceModel, K: np.ndarray, mu: Optional[float] = None) -> RobustFilterDesign:
    """Backward robust filter; its realization is integrated from T towards 0."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    S, Q = _riccati_terms(ss, K)
    try:
        solution = solve_care(ss.A, S, Q)
    except SolverError as e:
        raise InfeasibleUncertaintyLevel(mu if mu is not None else float("nan"), reason=f"backward Riccati: {e}") from e
    Z = solution.X
    _check_information(Z, SingularZ, "Z", mu)
    xi_dynamics = (ss.A - S @ Z).T
    realization = FilterRealization(A_f=xi_dynamics, B_f=ss.H.T * R_IQC, direction=Direction.BACKWARD,
                                    state_map=np.linalg.inv(Z), name="robust_backward").estimate_form()
    return RobustFilterDesign(Z, realization, solution.residual_norm)


def robust_smoother(Y: np.ndarray, Z: np.ndarray) -> Combiner:
    """Weights (Y + Z)^-1 Y and (Y + Z)^-1 Z; covariance proxy (Y + Z)^-1."""
    return Combiner.from_information(np.asarray(Y, dtype=float), np.asarray(Z, dtype=float))


def _design_at(ss: StateSpaceModel, K: np.ndarray, mu: Optional[float]) -> RobustDesign:
    forward = robust_forward(ss, K, mu=mu)
    backward = robust_backward(ss, K, mu=mu)
    combiner = robust_smoother(forward.information, backward.information)
    return RobustDesign(Y=forward.information, Z=backward.information, forward=forward.realization,
                        backward=backward.realization, combiner=combiner,
                        residual_forward=forward.residual_norm, residual_backward=backward.residual_norm)


def is_feasible(ss: StateSpaceModel, K: np.ndarray) -> bool:
    try:
        _design_at(ss, K, None)
    except (InfeasibleUncertaintyLevel, SingularMatrixError, SolverError):
        return False
    return True


def largest_feasible_mu(ss: StateSpaceModel, unc: UncertaintyStructure, upper: Optional[float] = None,
                        steps: int = FEASIBILITY_BISECTION_STEPS) -> float:
    """Bisection on the uncertainty level; K is linear in mu, so K(m) = K m / mu."""
    upper = unc.mu if upper is None else upper
    if unc.mu == 0:
        return 0.0
    unit_K = unc.K / unc.mu
    lo, hi = 0.0, upper
    if is_feasible(ss, unit_K * hi):
        return hi
    for _ in range(steps):
        mid = (lo + hi) / 2
        if is_feasible(ss, unit_K * mid):
            lo = mid
        else:
            hi = mid
    return lo


def design_robust(ss: StateSpaceModel, unc: UncertaintyStructure) -> RobustDesign:
    """Robust forward filter, backward filter and smoother combiner at uncertainty level unc.mu."""
    try:
        design = _design_at(ss, unc.K, unc.mu)
    except (InfeasibleUncertaintyLevel, SingularMatrixError, SolverError) as e:
        feasible_mu = largest_feasible_mu(ss, unc)
        logger.error(f"Robust design failed at mu={unc.mu}: {e}; largest feasible mu {feasible_mu:.6g}")
        raise InfeasibleUncertaintyLevel(unc.mu, feasible_mu, reason=str(e)) from e
    logger.debug(f"Robust design mu={unc.mu}: residuals {design.residual_forward:.2e}, {design.residual_backward:.2e}")
    return design
