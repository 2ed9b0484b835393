import numpy as np

from core.exceptions import NonPositiveInput
from core.features.feature_base import FeatureBase, FeatureConfig


def to_db(x) -> np.ndarray:
    """10 log10(x) for mean-square errors in rad^2."""
    values = np.asarray(x, dtype=float)
    if np.any(~(values > 0)):
        raise NonPositiveInput(f"dB conversion needs positive values, got {values[~(values > 0)][:3]}")
    result = 10 * np.log10(values)
    return float(result) if result.ndim == 0 else result


class DecibelConfig(FeatureConfig):
    name: str = "decibel"
    source_prefix: str = "err_"
    target_prefix: str = "db_"


class Decibel(FeatureBase[DecibelConfig]):
    def transform(self, values: np.ndarray) -> np.ndarray:
        return to_db(values)
