from typing import Optional


class EstimationError(Exception):
    """Base class for every error raised by the estimation library."""


class SolverError(EstimationError):
    pass


class ImaginaryAxisEigenvalue(SolverError):
    """The Hamiltonian has eigenvalues on the imaginary axis, so no stabilizing Riccati solution exists."""


class NonConvergence(SolverError):
    pass


class UnstableMatrix(SolverError):
    pass


class ModelError(EstimationError, ValueError):
    pass


class DeltaOutOfRange(ModelError):
    pass


class SqueezingOutOfRange(ModelError):
    pass


class NonPositiveRsq(ModelError):
    pass


class SingularMatrixError(EstimationError):
    pass


class SingularCovariance(SingularMatrixError):
    pass


class SingularY(SingularMatrixError):
    pass


class SingularZ(SingularMatrixError):
    pass


class SingularCombiner(SingularMatrixError):
    pass


class SingularSigma(SingularMatrixError):
    pass


class InfeasibleUncertaintyLevel(EstimationError):
    def __init__(self, mu: float, largest_feasible_mu: Optional[float] = None, reason: str = ""):
        self.mu = mu
        self.largest_feasible_mu = largest_feasible_mu
        self.reason = reason
        message = f"Robust design infeasible at mu={mu:g}"
        if largest_feasible_mu is not None:
            message += f"; largest feasible mu found is {largest_feasible_mu:.6g}"
        if reason:
            message += f" ({reason})"
        super().__init__(message)


class UnstableAugmentedSystem(EstimationError):
    pass


class DegenerateDenominator(EstimationError):
    pass


class NonPositiveInput(EstimationError, ValueError):
    pass


class FixedPointNonConvergence(EstimationError):
    def __init__(self, iterations: int, previous: float, last: float):
        self.iterations = iterations
        self.previous = previous
        self.last = last
        super().__init__(f"sigma_f^2 fixed point did not converge after {iterations} iterations "
                         f"(last iterates {previous:.9g}, {last:.9g})")


class EmptyWindow(EstimationError, ValueError):
    pass
