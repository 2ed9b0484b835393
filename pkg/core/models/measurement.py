"""
Linearized homodyne measurement models: theta = H x + J w.

Coherent beam: H = [2|alpha|, 0], J = 1.
Phase-squeezed beam: the photocurrent noise is scaled by sqrt(R_sq), which after normalisation gives
H = [2|alpha| / sqrt(R_sq), 0] with R_sq = sigma_f^2 e^{2 r_p} + (1 - sigma_f^2) e^{-2 r_m}.
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, root_validator, validator

from core.exceptions import NonPositiveRsq, SqueezingOutOfRange
from core.models.defaults import DEFAULT_PARAMS


class SqueezingParams(BaseModel):
    alpha_mag: float = DEFAULT_PARAMS["alpha_mag"]
    r_m: float = DEFAULT_PARAMS["r_m"]
    r_p: float = DEFAULT_PARAMS["r_p"]

    class Config:
        allow_mutation = False

    @validator("alpha_mag")
    def _positive_amplitude(cls, v):
        if not v > 0:
            raise ValueError(f"alpha_mag must be positive, got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def _ordered_squeezing(cls, values):
        r_m, r_p = values["r_m"], values["r_p"]
        if not 0 <= r_m <= r_p:
            raise ValueError(f"squeezing must satisfy 0 <= r_m <= r_p, got r_m={r_m}, r_p={r_p}")
        return values


def build_coherent_measurement(alpha_mag: float) -> Tuple[np.ndarray, float]:
    if not alpha_mag > 0:
        raise ValueError(f"alpha_mag must be positive, got {alpha_mag}")
    return np.array([[2 * alpha_mag, 0.0]]), 1.0


def squeezed_noise_factor(sq: SqueezingParams, sigma_f_sq: float) -> float:
    """R_sq for a loop whose filtered phase error variance is sigma_f_sq."""
    if not 0 <= sigma_f_sq <= 1:
        # outside [0, 1] the small-angle linearization no longer holds
        raise SqueezingOutOfRange(f"sigma_f^2 must lie in [0, 1] for the linearized squeezed model, got {sigma_f_sq}")
    r_sq = sigma_f_sq * np.exp(2 * sq.r_p) + (1 - sigma_f_sq) * np.exp(-2 * sq.r_m)
    if not r_sq > 0:
        raise NonPositiveRsq(f"R_sq={r_sq} is not positive")
    return float(r_sq)


def build_squeezed_measurement(sq: SqueezingParams, sigma_f_sq: float) -> Tuple[np.ndarray, float]:
    """Returns (H, R_sq); the measurement noise gain stays J = 1."""
    r_sq = squeezed_noise_factor(sq, sigma_f_sq)
    H = np.array([[2 * sq.alpha_mag / np.sqrt(r_sq), 0.0]])
    return H, r_sq
