from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from core.data_structures.data_structure_base import DataStructureBase


class Trajectory(DataStructureBase):
    """Sampled true state (phi, phi_dot) and homodyne measurement theta on a uniform time grid."""

    STATE_COLUMNS = ["phi", "phi_dot"]

    def __init__(self, data: pd.DataFrame, metadata: Optional[Dict[str, Any]] = None):
        super().__init__(data, metadata)
        times = self.times
        if len(times) > 2 and not np.allclose(np.diff(times), times[1] - times[0], rtol=1e-9, atol=0):
            raise ValueError("trajectory time grid is not uniform")

    @classmethod
    def from_arrays(cls, times: np.ndarray, x: np.ndarray, theta: np.ndarray,
                    metadata: Optional[Dict[str, Any]] = None) -> "Trajectory":
        x = np.asarray(x, dtype=float)
        if not len(times) == len(x) == len(theta):
            raise ValueError(f"lengths differ: times={len(times)}, x={len(x)}, theta={len(theta)}")
        data = pd.DataFrame({"time": times, "phi": x[:, 0], "phi_dot": x[:, 1], "theta": theta})
        return cls(data, metadata)

    @property
    def times(self) -> np.ndarray:
        return self.data["time"].to_numpy()

    @property
    def x(self) -> np.ndarray:
        return self.data[self.STATE_COLUMNS].to_numpy()

    @property
    def phi(self) -> np.ndarray:
        return self.data["phi"].to_numpy()

    @property
    def theta(self) -> np.ndarray:
        return self.data["theta"].to_numpy()

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.data) > 1 else 0.0

    def __len__(self):
        return len(self.data)
