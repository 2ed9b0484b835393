"""
Steady-state error analysis of estimators designed at the nominal model and run against the true plant
A + G Delta K.

Each filter is stacked with the plant it observes, x_bar = (x, x_hat), and the stationary covariance of x_bar
follows from a Lyapunov equation. Backward filters see the measurement record in reverse; by default they are
stacked with the time-reversed model of the true plant (A_r = Sigma A^T Sigma^-1, same noise intensity), which
keeps E[x x_hat_b^T] consistent with the forward stack when the two are combined. Forward and backward estimates
are conditionally independent given x(t), which gives the cross term Pi_fb = Sigma - M_f^T - M_b + alpha Sigma beta.
"""
import logging
from enum import Enum
from typing import Dict, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel

from core.exceptions import DegenerateDenominator, SingularSigma, UnstableAugmentedSystem
from core.filters.filter_base import Combiner, FilterRealization
from core.filters.optimal import KalmanDesign, kalman_backward, kalman_forward, rts_combiner
from core.filters.robust import RobustDesign, design_robust
from core.models.resonant import StateSpaceModel
from core.models.uncertainty import UncertaintyStructure, apply_uncertainty
from core.solvers import is_hurwitz, lyapunov_residual, solve_lyapunov, symmetrize

logger = logging.getLogger(__name__)

DENOMINATOR_GUARD = 1e-300


class EstimatorKind(str, Enum):
    KALMAN_FILTER = "kalman_filter"
    RTS_SMOOTHER = "rts_smoother"
    ROBUST_FILTER = "robust_filter"
    ROBUST_SMOOTHER = "robust_smoother"

    @property
    def is_smoother(self) -> bool:
        return self in (EstimatorKind.RTS_SMOOTHER, EstimatorKind.ROBUST_SMOOTHER)

    @property
    def is_robust(self) -> bool:
        return self in (EstimatorKind.ROBUST_FILTER, EstimatorKind.ROBUST_SMOOTHER)


ESTIMATORS = [kind.value for kind in EstimatorKind]


class BackwardPlant(str, Enum):
    REVERSED = "reversed"
    FORWARD = "forward"


class SmootherCombination(str, Enum):
    """
    SCALAR treats the phase components of the two filter errors as one correlated pair and takes their best linear
    combination, (pi_f pi_b - pi_fb^2) / (pi_f + pi_b - 2 pi_fb). MATRIX is the (1,1) entry of the covariance of the
    combined estimate W_f x_hat_f + W_b x_hat_b; it is what a simulated smoother actually attains and equals P_s(1,1)
    at delta=0 for the RTS pair.
    """
    MATRIX = "matrix"
    SCALAR = "scalar"


class AugmentedSystem(BaseModel):
    A_bar: np.ndarray
    B_bar: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False


class ErrorCovariance(NamedTuple):
    Sigma: np.ndarray
    M: np.ndarray
    N: np.ndarray
    Pi: np.ndarray
    residual_norm: float


class ErrorDecomposition(BaseModel):
    Sigma: np.ndarray
    M_f: np.ndarray
    M_b: np.ndarray
    N_f: np.ndarray
    N_b: np.ndarray
    Pi_f: np.ndarray
    Pi_b: np.ndarray
    Pi_fb: np.ndarray
    Pi_s: np.ndarray
    Pi: float
    max_residual: float

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @property
    def filtered(self) -> float:
        return float(self.Pi_f[0, 0])


def augment(true_A: np.ndarray, G: np.ndarray, H: np.ndarray, J: float, filt: FilterRealization) -> AugmentedSystem:
    """A_bar = [[A_true, 0], [B_f H, A_f]], B_bar = [[G, 0], [0, B_f J]] driven by (v, w)."""
    n = filt.n
    G = np.asarray(G, dtype=float).reshape(-1, 1)
    H = np.asarray(H, dtype=float).reshape(1, -1)
    true_A = np.asarray(true_A, dtype=float)
    if true_A.shape != (n, n) or G.shape[0] != n or H.shape[1] != n:
        raise ValueError(f"plant dimensions {true_A.shape} do not match a {n}-state filter")
    A_bar = np.block([[true_A, np.zeros((n, n))],
                      [filt.B_f @ H, filt.A_f]])
    B_bar = np.block([[G, np.zeros((n, 1))],
                      [np.zeros((n, 1)), filt.B_f * J]])
    if not is_hurwitz(A_bar):
        raise UnstableAugmentedSystem(f"augmented system with {filt.name or 'filter'} is not Hurwitz")
    return AugmentedSystem(A_bar=A_bar, B_bar=B_bar)


def error_covariance(aug: AugmentedSystem) -> ErrorCovariance:
    """P = [[Sigma, M], [M^T, N]] from A_bar P + P A_bar^T + B_bar B_bar^T = 0, and Pi = Sigma - M - M^T + N."""
    Q = aug.B_bar @ aug.B_bar.T
    P = solve_lyapunov(aug.A_bar, Q)
    n = aug.A_bar.shape[0] // 2
    Sigma, M, N = P[:n, :n], P[:n, n:], P[n:, n:]
    Pi = symmetrize(Sigma - M - M.T + N)
    return ErrorCovariance(Sigma, M, N, Pi, lyapunov_residual(aug.A_bar, P, Q))


def cross_correlation(Sigma: np.ndarray, M_f: np.ndarray, M_b: np.ndarray) -> np.ndarray:
    """Pi_fb = E[e_f e_b^T] = Sigma - M_f^T - M_b + alpha Sigma beta, alpha = M_f^T Sigma^-1, beta = Sigma^-1 M_b."""
    Sigma = np.atleast_2d(Sigma)
    if np.linalg.cond(Sigma) > 1 / np.finfo(float).eps:
        raise SingularSigma("true-state covariance is singular")
    beta = np.linalg.solve(Sigma, M_b)
    alpha_sigma_beta = M_f.T @ beta
    return Sigma - M_f.T - M_b + alpha_sigma_beta


def smoother_error(pi_f: float, pi_b: float, pi_fb: float) -> float:
    """Error variance of the minimum-variance combination of two scalar estimates with correlated errors."""
    denominator = pi_f + pi_b - 2 * pi_fb
    numerator = pi_f * pi_b - pi_fb ** 2
    if denominator <= DENOMINATOR_GUARD:
        # identical, fully correlated estimates: combining gains nothing
        if abs(numerator) <= 1e-12 * max(abs(pi_f * pi_b), np.finfo(float).tiny) and abs(pi_f - pi_b) <= 1e-12 * abs(pi_f):
            return float(min(pi_f, pi_b))
        raise DegenerateDenominator(f"pi_f + pi_b - 2 pi_fb = {denominator:.3e}")
    return float(numerator / denominator)


def combined_smoother_covariance(Pi_f: np.ndarray, Pi_b: np.ndarray, Pi_fb: np.ndarray, combiner: Combiner) -> np.ndarray:
    """Covariance of W_f e_f + W_b e_b, the error of x_hat = W_f x_hat_f + W_b x_hat_b."""
    W_f, W_b = combiner.W_f, combiner.W_b
    cross = W_f @ Pi_fb @ W_b.T
    return symmetrize(W_f @ Pi_f @ W_f.T + W_b @ Pi_b @ W_b.T + cross + cross.T)


def reversed_dynamics(A: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Drift of the stationary process x(T - tau): Sigma A^T Sigma^-1 with A Sigma + Sigma A^T + G G^T = 0."""
    G = np.asarray(G, dtype=float).reshape(-1, 1)
    Sigma = solve_lyapunov(A, G @ G.T)
    return np.linalg.solve(Sigma, (Sigma @ A.T).T).T


def check_conventions(backward_plant: BackwardPlant, smoother_combination: SmootherCombination):
    """
    The matrix combination weighs x_hat_b as an estimate of x(t) in forward time, which only holds when the backward
    stack runs on the time-reversed plant. With the forward plant it yields smoothed errors above both filters.
    """
    if BackwardPlant(backward_plant) == BackwardPlant.FORWARD and \
            SmootherCombination(smoother_combination) == SmootherCombination.MATRIX:
        raise ValueError("smoother_combination=matrix needs backward_plant=reversed; "
                         "use smoother_combination=scalar with the forward backward plant")


class EstimatorBank:
    """Every estimator designed for one nominal measurement model."""

    def __init__(self, ss: StateSpaceModel, kalman_f: KalmanDesign, kalman_b: KalmanDesign, rts: Combiner,
                 robust: Optional[RobustDesign] = None):
        self.ss = ss
        self.kalman_f = kalman_f
        self.kalman_b = kalman_b
        self.rts = rts
        self.robust = robust

    @classmethod
    def design(cls, ss: StateSpaceModel, unc: Optional[UncertaintyStructure] = None) -> "EstimatorBank":
        kalman_f = kalman_forward(ss)
        kalman_b = kalman_backward(ss)
        robust = design_robust(ss, unc) if unc is not None else None
        return cls(ss=ss, kalman_f=kalman_f, kalman_b=kalman_b, rts=rts_combiner(kalman_f.P, kalman_b.P), robust=robust)

    def family(self, robust: bool):
        if robust:
            if self.robust is None:
                raise ValueError("bank was designed without an uncertainty structure")
            return self.robust.forward, self.robust.backward, self.robust.combiner
        return self.kalman_f.realization, self.kalman_b.realization, self.rts

    @property
    def max_riccati_residual(self) -> float:
        residuals = [self.kalman_f.residual_norm, self.kalman_b.residual_norm]
        if self.robust is not None:
            residuals += [self.robust.residual_forward, self.robust.residual_backward]
        return max(residuals)


class ErrorAnalysisEngine:
    """
    Designs the estimators once at the nominal model and evaluates their steady-state phase error against the
    true plant for any delta.
    """

    def __init__(self, ss: StateSpaceModel, unc: UncertaintyStructure,
                 backward_plant: BackwardPlant = BackwardPlant.REVERSED,
                 smoother_combination: SmootherCombination = SmootherCombination.SCALAR,
                 bank: Optional[EstimatorBank] = None):
        self.ss = ss
        self.unc = unc
        self.backward_plant = BackwardPlant(backward_plant)
        self.smoother_combination = SmootherCombination(smoother_combination)
        check_conventions(self.backward_plant, self.smoother_combination)
        self._bank = bank

    @property
    def bank(self) -> EstimatorBank:
        if self._bank is None:
            self._bank = EstimatorBank.design(self.ss, self.unc)
        return self._bank

    def true_dynamics(self, delta: float) -> np.ndarray:
        return apply_uncertainty(self.ss.A, self.ss.G, self.unc, delta)

    def decompose(self, delta: float, robust: bool) -> ErrorDecomposition:
        """Full error decomposition of one filter pair and its smoother at the true plant for delta."""
        forward, backward, combiner = self.bank.family(robust)
        A_true = self.true_dynamics(delta)
        A_back = reversed_dynamics(A_true, self.ss.G) if self.backward_plant == BackwardPlant.REVERSED else A_true
        fwd = error_covariance(augment(A_true, self.ss.G, self.ss.H, self.ss.J, forward))
        bwd = error_covariance(augment(A_back, self.ss.G, self.ss.H, self.ss.J, backward))
        Pi_fb = cross_correlation(fwd.Sigma, fwd.M, bwd.M)
        Pi_s = combined_smoother_covariance(fwd.Pi, bwd.Pi, Pi_fb, combiner)
        if self.smoother_combination == SmootherCombination.MATRIX:
            Pi = float(Pi_s[0, 0])
        else:
            Pi = smoother_error(fwd.Pi[0, 0], bwd.Pi[0, 0], Pi_fb[0, 0])
        if Pi > min(fwd.Pi[0, 0], bwd.Pi[0, 0]) + 1e-12:
            logger.warning(f"delta={delta}: smoothed error {Pi:.6g} exceeds the better filter "
                           f"({fwd.Pi[0, 0]:.6g}, {bwd.Pi[0, 0]:.6g})")
        return ErrorDecomposition(Sigma=fwd.Sigma, M_f=fwd.M, M_b=bwd.M, N_f=fwd.N, N_b=bwd.N, Pi_f=fwd.Pi, Pi_b=bwd.Pi,
                                  Pi_fb=Pi_fb, Pi_s=Pi_s, Pi=Pi, max_residual=max(fwd.residual_norm, bwd.residual_norm))

    def filter_error(self, delta: float, robust: bool) -> float:
        forward, _, _ = self.bank.family(robust)
        result = error_covariance(augment(self.true_dynamics(delta), self.ss.G, self.ss.H, self.ss.J, forward))
        return float(result.Pi[0, 0])

    def evaluate(self, delta: float, kind: EstimatorKind) -> float:
        kind = EstimatorKind(kind)
        if kind.is_smoother:
            return self.decompose(delta, kind.is_robust).Pi
        return self.filter_error(delta, kind.is_robust)

    def evaluate_all(self, delta: float) -> Dict[str, float]:
        errors = {}
        for robust, (filter_kind, smoother_kind) in ((False, (EstimatorKind.KALMAN_FILTER, EstimatorKind.RTS_SMOOTHER)),
                                                     (True, (EstimatorKind.ROBUST_FILTER, EstimatorKind.ROBUST_SMOOTHER))):
            decomposition = self.decompose(delta, robust)
            errors[filter_kind.value] = decomposition.filtered
            errors[smoother_kind.value] = decomposition.Pi
        return errors


def evaluate_estimator(ss: StateSpaceModel, unc: UncertaintyStructure, delta: float, estimator_kind: EstimatorKind,
                       **engine_options) -> float:
    """Phase error (rad^2) of one estimator designed at the nominal model and run against A + G Delta K."""
    return ErrorAnalysisEngine(ss, unc, **engine_options).evaluate(delta, estimator_kind)
