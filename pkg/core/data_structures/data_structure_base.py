from typing import Any, Dict, Optional

import pandas as pd
import yaml

from core.features.feature_base import FeatureBase

CSV_FLOAT_FORMAT = "%.9g"
METADATA_PREFIX = "# "


class DataStructureBase:
    def __init__(self, data: pd.DataFrame, metadata: Optional[Dict[str, Any]] = None, *args, **kwargs):
        self.data = data
        self.metadata = dict(metadata or {})

    def add_feature(self, feature: FeatureBase):
        self.data = feature.calculate(self.data)
        return self

    def metadata_block(self) -> str:
        if not self.metadata:
            return ""
        dumped = yaml.safe_dump(self.metadata, sort_keys=False, default_flow_style=False)
        return "".join(f"{METADATA_PREFIX}{line}\n" for line in dumped.splitlines())

    def to_csv_string(self) -> str:
        body = self.data.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return body + self.metadata_block()

    def to_csv(self, path: str):
        with open(path, "w", newline="") as f:
            f.write(self.to_csv_string())


def read_metadata(path: str) -> Dict[str, Any]:
    """Parses the trailing '# ' block written by DataStructureBase.to_csv."""
    with open(path, "r") as f:
        lines = [line[len(METADATA_PREFIX):] for line in f if line.startswith(METADATA_PREFIX)]
    return yaml.safe_load("".join(lines)) or {}


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")
