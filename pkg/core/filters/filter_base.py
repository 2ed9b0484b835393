from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, root_validator, validator

from core.exceptions import SingularCombiner, UnstableMatrix
from core.solvers import is_hurwitz


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class FilterRealization(BaseModel):
    """
    Linear estimator driven by the scalar measurement theta:

        d(state)/d(tau) = A_f state + B_f theta,    x_hat = state_map state

    tau runs forward in time for forward filters and from T down to 0 for backward filters, so A_f is
    Hurwitz in its own integration direction (asserted on construction).
    """
    A_f: np.ndarray
    B_f: np.ndarray
    direction: Direction = Direction.FORWARD
    state_map: Optional[np.ndarray] = None
    name: str = ""

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("A_f", "B_f", "state_map", pre=True)
    def _as_float_array(cls, v):
        return None if v is None else np.atleast_2d(np.asarray(v, dtype=float))

    @validator("B_f")
    def _column(cls, v):
        return v.reshape(-1, 1)

    @root_validator(skip_on_failure=True)
    def _consistent_and_stable(cls, values):
        A_f, B_f = values["A_f"], values["B_f"]
        n = A_f.shape[0]
        if A_f.shape != (n, n) or B_f.shape[0] != n:
            raise ValueError(f"inconsistent realization shapes A_f={A_f.shape}, B_f={B_f.shape}")
        if values.get("state_map") is None:
            values["state_map"] = np.eye(n)
        elif values["state_map"].shape != (n, n):
            raise ValueError(f"state_map must be {n}x{n}")
        if not is_hurwitz(A_f):
            raise UnstableMatrix(f"{values.get('name') or 'filter'} dynamics are not Hurwitz in the "
                                 f"{values['direction'].value} integration direction")
        return values

    @property
    def n(self) -> int:
        return self.A_f.shape[0]

    @property
    def is_forward(self) -> bool:
        return self.direction == Direction.FORWARD

    def estimate_form(self) -> "FilterRealization":
        """The same filter with the state map folded in, so its state is the estimate x_hat itself."""
        M = self.state_map
        if np.array_equal(M, np.eye(self.n)):
            return self
        A_hat = np.linalg.solve(M.T, (M @ self.A_f).T).T
        return FilterRealization(A_f=A_hat, B_f=M @ self.B_f, direction=self.direction, name=self.name)


class Combiner(BaseModel):
    """Fixed-interval smoother x_hat = W_f x_hat_f + W_b x_hat_b with W_f + W_b = I."""
    W_f: np.ndarray
    W_b: np.ndarray
    covariance_proxy: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @classmethod
    def from_information(cls, info_f: np.ndarray, info_b: np.ndarray, max_condition: float = 1e12) -> "Combiner":
        """Weights from the two information matrices: (I_f + I_b)^-1 I_f and (I_f + I_b)^-1 I_b."""
        total = info_f + info_b
        if np.linalg.cond(total) > max_condition:
            raise SingularCombiner("sum of the forward and backward information matrices is singular")
        proxy = np.linalg.inv(total)
        proxy = (proxy + proxy.T) / 2
        W_f = np.linalg.solve(total, info_f)
        return cls(W_f=W_f, W_b=np.eye(total.shape[0]) - W_f, covariance_proxy=proxy)

    def combine(self, x_f: np.ndarray, x_b: np.ndarray) -> np.ndarray:
        """Combines estimate series shaped (..., n)."""
        return x_f @ self.W_f.T + x_b @ self.W_b.T
