from abc import ABC, abstractmethod
from typing import Generic, List, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel

T = TypeVar('T', bound='FeatureConfig')


class FeatureConfig(BaseModel):
    """A feature maps every column named <source_prefix><key> to a new column <target_prefix><key>."""
    name: str
    source_prefix: str
    target_prefix: str


class FeatureBase(ABC, Generic[T]):
    def __init__(self, feature_config: T):
        self.config = feature_config

    def source_columns(self, data: pd.DataFrame) -> List[str]:
        return [col for col in data.columns if col.startswith(self.config.source_prefix)]

    def target_column(self, source: str) -> str:
        return self.config.target_prefix + source[len(self.config.source_prefix):]

    @abstractmethod
    def transform(self, values: np.ndarray) -> np.ndarray:
        ...

    def calculate(self, data: pd.DataFrame) -> pd.DataFrame:
        """Appends one derived column per source column, in source order."""
        for col in self.source_columns(data):
            data[self.target_column(col)] = self.transform(data[col].to_numpy())
        return data
