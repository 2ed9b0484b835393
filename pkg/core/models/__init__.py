from core.models.measurement import (
    SqueezingParams,
    build_coherent_measurement,
    build_squeezed_measurement,
    squeezed_noise_factor,
)
from core.models.resonant import (
    ResonantParams,
    StateSpaceModel,
    build_process,
    frequency_response_mag,
    frequency_response_table,
)
from core.models.uncertainty import UncertaintyStructure, apply_uncertainty, build_uncertainty


def coherent_model(p: ResonantParams, alpha_mag: float) -> StateSpaceModel:
    A, G = build_process(p)
    H, J = build_coherent_measurement(alpha_mag)
    return StateSpaceModel(A=A, G=G, H=H, J=J)


__all__ = [
    "ResonantParams",
    "SqueezingParams",
    "StateSpaceModel",
    "UncertaintyStructure",
    "apply_uncertainty",
    "build_coherent_measurement",
    "build_process",
    "build_squeezed_measurement",
    "build_uncertainty",
    "coherent_model",
    "frequency_response_mag",
    "frequency_response_table",
    "squeezed_noise_factor",
]
