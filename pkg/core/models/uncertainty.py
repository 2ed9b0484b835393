import numpy as np
from pydantic import BaseModel, validator

from core.exceptions import DeltaOutOfRange
from core.models.resonant import ResonantParams


class UncertaintyStructure(BaseModel):
    """Structured perturbation A -> A + G Delta K with Delta = [delta, 0] and |delta| <= delta_bound."""
    K: np.ndarray
    mu: float
    delta_bound: float = 1.0

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("mu")
    def _level(cls, v):
        if not 0 <= v < 1:
            raise ValueError(f"mu must lie in [0, 1), got {v}")
        return v

    def delta_matrix(self, delta: float) -> np.ndarray:
        return np.array([[delta, 0.0]])


def build_uncertainty(p: ResonantParams, mu: float) -> UncertaintyStructure:
    if not 0 <= mu < 1:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    K = np.zeros((2, 2))
    K[0, 0] = -mu * p.omega_r ** 2 / p.kappa
    return UncertaintyStructure(K=K, mu=mu)


def apply_uncertainty(A: np.ndarray, G: np.ndarray, u: UncertaintyStructure, delta: float) -> np.ndarray:
    """True dynamics A + G Delta K; for the resonant plant this is omega_r^2 -> omega_r^2 (1 + mu delta)."""
    if abs(delta) > u.delta_bound:
        raise DeltaOutOfRange(f"|delta| must not exceed {u.delta_bound}, got {delta}")
    G = np.asarray(G, dtype=float).reshape(-1, 1)
    return np.asarray(A, dtype=float) + G @ u.delta_matrix(delta) @ u.K
