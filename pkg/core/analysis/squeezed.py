"""
Operating point of a phase-locked loop fed by a phase-squeezed beam.

The measurement noise factor R_sq depends on the filtered phase error sigma_f^2 of the loop, which in turn depends on
R_sq, so the pair is found by plain fixed-point iteration started from the coherent-beam error.
"""
import logging
from typing import List

import numpy as np
from pydantic import BaseModel

from core.analysis.engine import ErrorAnalysisEngine, EstimatorBank, EstimatorKind
from core.exceptions import FixedPointNonConvergence
from core.models.measurement import SqueezingParams, build_squeezed_measurement
from core.models.resonant import StateSpaceModel
from core.models.uncertainty import UncertaintyStructure

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-6
FIXED_POINT_MAX_ITER = 200
LOOP_FILTERS = (EstimatorKind.KALMAN_FILTER, EstimatorKind.ROBUST_FILTER)


class SqueezedOperatingPoint(BaseModel):
    sigma_f_sq: float
    R_sq: float
    iterations: int
    history: List[float]
    H: np.ndarray
    loop_filter_kind: EstimatorKind

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @property
    def steps(self) -> np.ndarray:
        """|sigma^(k) - sigma^(k-1)| for every iteration."""
        return np.abs(np.diff(self.history))

    def model(self, ss_base: StateSpaceModel) -> StateSpaceModel:
        return ss_base.with_measurement(self.H, ss_base.J)


def loop_filter_error(ss: StateSpaceModel, unc: UncertaintyStructure, delta: float, loop_filter_kind: EstimatorKind) -> float:
    """Filtered phase error at the true plant of a loop filter designed for ss."""
    robust = EstimatorKind(loop_filter_kind).is_robust
    bank = EstimatorBank.design(ss, unc if robust else None)
    return ErrorAnalysisEngine(ss, unc, bank=bank).filter_error(delta, robust)


def squeezed_fixed_point(ss_base: StateSpaceModel, unc: UncertaintyStructure, delta: float, sq: SqueezingParams,
                         loop_filter_kind: EstimatorKind, tol: float = FIXED_POINT_TOL,
                         max_iter: int = FIXED_POINT_MAX_ITER, relaxation: float = 1.0) -> SqueezedOperatingPoint:
    """
    Iterates sigma <- Pi_f(1,1) of the loop filter redesigned for H(sigma) = [2|alpha| / sqrt(R_sq(sigma)), 0] and
    evaluated at the true delta, starting from the coherent-beam filtered error of ss_base.

    With relaxation < 1 the next iterate is sigma + relaxation (g(sigma) - sigma), which damps oscillating
    iterations; history records g(sigma) either way and convergence is |g(sigma) - sigma| < tol.
    """
    loop_filter_kind = EstimatorKind(loop_filter_kind)
    if loop_filter_kind not in LOOP_FILTERS:
        raise ValueError(f"loop filter must be one of {[k.value for k in LOOP_FILTERS]}, got {loop_filter_kind.value}")
    if not 0 < relaxation <= 1:
        raise ValueError(f"relaxation must lie in (0, 1], got {relaxation}")

    sigma = loop_filter_error(ss_base, unc, delta, loop_filter_kind)
    history = [sigma]
    residual = float("inf")
    for iteration in range(1, max_iter + 1):
        H, r_sq = build_squeezed_measurement(sq, sigma)
        updated = loop_filter_error(ss_base.with_measurement(H, ss_base.J), unc, delta, loop_filter_kind)
        history.append(updated)
        residual = abs(updated - sigma)
        logger.debug(f"delta={delta:+.4f} {loop_filter_kind.value} iteration {iteration}: sigma_f^2={updated:.9g}, R_sq={r_sq:.6g}")
        if residual < tol:
            H, r_sq = build_squeezed_measurement(sq, updated)
            return SqueezedOperatingPoint(sigma_f_sq=updated, R_sq=r_sq, iterations=iteration, history=history, H=H,
                                          loop_filter_kind=loop_filter_kind)
        sigma = sigma + relaxation * (updated - sigma)
    logger.warning(f"delta={delta:+.4f} {loop_filter_kind.value}: no fixed point after {max_iter} iterations, "
                   f"last residual |g(sigma) - sigma| = {residual:.3g} (tol {tol:g}, relaxation {relaxation:g})")
    raise FixedPointNonConvergence(max_iter, history[-2], history[-1])
