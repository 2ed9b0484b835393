import numpy as np
import pytest

from core.filters.optimal import kalman_backward, kalman_forward, rts_smoother_covariance
from core.models import ResonantParams, SqueezingParams, StateSpaceModel, build_uncertainty, coherent_model


@pytest.fixture(scope="session")
def params() -> ResonantParams:
    return ResonantParams()


@pytest.fixture(scope="session")
def squeezing() -> SqueezingParams:
    return SqueezingParams()


@pytest.fixture(scope="session")
def ss(params, squeezing) -> StateSpaceModel:
    return coherent_model(params, squeezing.alpha_mag)


@pytest.fixture(scope="session")
def kalman_pair(ss):
    return kalman_forward(ss), kalman_backward(ss)


@pytest.fixture(scope="session")
def P_s(kalman_pair) -> np.ndarray:
    kf, kb = kalman_pair
    return rts_smoother_covariance(kf.P, kb.P)


@pytest.fixture(scope="session")
def uncertainty(params):
    def build(mu: float):
        return build_uncertainty(params, mu)
    return build


@pytest.fixture
def scalar_model() -> StateSpaceModel:
    """x' = v, theta = x + w: forward and backward Kalman covariances are both 1."""
    return StateSpaceModel(A=[[0.0]], G=[[1.0]], H=[[1.0]])
