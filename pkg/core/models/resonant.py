from typing import Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, validator

from core.models.defaults import DEFAULT_PARAMS


class ResonantParams(BaseModel):
    """
    Second-order resonant noise driving the phase: G(s) = kappa / (s^2 + 2 zeta omega_r s + omega_r^2).

    kappa is the gain from unit-intensity white noise to the phase acceleration (rad s^-2 Hz^-1/2).
    """
    kappa: float = DEFAULT_PARAMS["kappa"]
    zeta: float = DEFAULT_PARAMS["zeta"]
    omega_r: float = DEFAULT_PARAMS["omega_r"]

    class Config:
        allow_mutation = False

    @validator("kappa", "omega_r")
    def _positive(cls, v, field):
        if not v > 0:
            raise ValueError(f"{field.name} must be positive, got {v}")
        return v

    @validator("zeta")
    def _underdamped(cls, v):
        if not 0 < v < 1:
            raise ValueError(f"zeta must lie in (0, 1), got {v}")
        return v

    @property
    def peak_frequency(self) -> float:
        """Frequency of the magnitude peak, omega_r sqrt(1 - 2 zeta^2) (zero when the response is monotone)."""
        return self.omega_r * np.sqrt(max(1 - 2 * self.zeta ** 2, 0.0))


class StateSpaceModel(BaseModel):
    """Process x' = A x + G v and measurement theta = H x + J w with intensities N and S."""
    A: np.ndarray
    G: np.ndarray
    H: np.ndarray
    J: float = 1.0
    N: float = 1.0
    S: float = 1.0

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("A", "G", "H", pre=True)
    def _as_float_array(cls, v):
        return np.asarray(v, dtype=float)

    @validator("G")
    def _column(cls, v):
        return v.reshape(-1, 1)

    @validator("H")
    def _row(cls, v):
        return v.reshape(1, -1)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def measurement_intensity(self) -> float:
        """J S J^T, the intensity of the measurement noise seen in theta."""
        return self.J * self.S * self.J

    def with_measurement(self, H: np.ndarray, J: float = 1.0) -> "StateSpaceModel":
        return StateSpaceModel(A=self.A, G=self.G, H=H, J=J, N=self.N, S=self.S)


def build_process(p: ResonantParams) -> Tuple[np.ndarray, np.ndarray]:
    """Companion realization with x = (phi, phi_dot)."""
    A = np.array([[0.0, 1.0],
                  [-p.omega_r ** 2, -2 * p.zeta * p.omega_r]])
    G = np.array([[0.0], [p.kappa]])
    return A, G


def _transfer_function(p: ResonantParams, omega: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    s = 1j * np.asarray(omega, dtype=float)
    return p.kappa / (s ** 2 + 2 * p.zeta * p.omega_r * s + p.omega_r ** 2)


def frequency_response_mag(p: ResonantParams, omega: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    |G(j omega)| and its value in dB (20 log10 of the amplitude ratio).
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("omega must be non-negative")
    magnitude = p.kappa / np.sqrt((p.omega_r ** 2 - omega ** 2) ** 2 + (2 * p.zeta * p.omega_r * omega) ** 2)
    with np.errstate(divide="ignore"):
        magnitude_db = 20 * np.log10(magnitude)
    return magnitude, magnitude_db


def frequency_response_table(p: ResonantParams, omegas: np.ndarray = None, n_points: int = 400) -> pd.DataFrame:
    """Bode data (magnitude, dB, phase in degrees) on a log-spaced grid two decades either side of omega_r."""
    if omegas is None:
        omegas = np.logspace(np.log10(p.omega_r) - 2, np.log10(p.omega_r) + 2, n_points)
    omegas = np.asarray(omegas, dtype=float)
    magnitude, magnitude_db = frequency_response_mag(p, omegas)
    phase = np.degrees(np.unwrap(np.angle(_transfer_function(p, omegas))))
    return pd.DataFrame({
        "omega": omegas,
        "frequency_hz": omegas / (2 * np.pi),
        "magnitude": magnitude,
        "magnitude_db": magnitude_db,
        "phase_deg": phase,
    })
