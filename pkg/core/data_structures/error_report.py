from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from core.analysis.engine import ESTIMATORS, EstimatorKind
from core.data_structures.data_structure_base import DataStructureBase
from core.features.decibel import Decibel, DecibelConfig, to_db

STATE_KINDS = ("coherent", "squeezed")
ERROR_PREFIX = "err_"
DB_PREFIX = "db_"


class WorstCase(NamedTuple):
    delta: float
    error: float


class ErrorReport(DataStructureBase):
    """
    Steady-state phase errors of each estimator over a delta grid, one row per delta:
    delta, mu, state, err_<estimator> (rad^2) and db_<estimator> (dB).
    """

    def __init__(self, data: pd.DataFrame, metadata: Optional[Dict[str, Any]] = None):
        super().__init__(data, metadata)
        self._validate()
        if not any(col.startswith(DB_PREFIX) for col in self.data.columns):
            self.add_feature(Decibel(DecibelConfig(source_prefix=ERROR_PREFIX, target_prefix=DB_PREFIX)))
        self.data = self.data[self._column_order()].reset_index(drop=True)

    @classmethod
    def from_rows(cls, rows: List[Dict[str, Any]], metadata: Optional[Dict[str, Any]] = None) -> "ErrorReport":
        """Rows carry delta, mu, state and one error per estimator keyed by the estimator name."""
        records = []
        for row in rows:
            record = {"delta": float(row["delta"]), "mu": float(row["mu"]), "state": row["state"]}
            for estimator in ESTIMATORS:
                if estimator in row:
                    record[ERROR_PREFIX + estimator] = float(row[estimator])
            records.append(record)
        return cls(pd.DataFrame.from_records(records), metadata)

    def _validate(self):
        if self.data.empty:
            raise ValueError("error report has no rows")
        deltas = self.data["delta"].to_numpy()
        if np.any(np.diff(deltas) <= 0):
            raise ValueError("report deltas must be strictly increasing")
        unknown = set(self.data["state"]) - set(STATE_KINDS)
        if unknown:
            raise ValueError(f"unknown state kinds {sorted(unknown)}")
        errors = self.data[self.error_columns].to_numpy()
        if errors.size == 0:
            raise ValueError("error report has no estimator columns")
        if np.any(~(errors > 0)):
            raise ValueError("all estimator errors must be positive")

    def _column_order(self) -> List[str]:
        estimators = self.estimators
        return (["delta", "mu", "state"] + [ERROR_PREFIX + e for e in estimators] + [DB_PREFIX + e for e in estimators])

    @property
    def error_columns(self) -> List[str]:
        return [col for col in self.data.columns if col.startswith(ERROR_PREFIX)]

    @property
    def estimators(self) -> List[str]:
        present = {col[len(ERROR_PREFIX):] for col in self.error_columns}
        return [e for e in ESTIMATORS if e in present]

    @property
    def deltas(self) -> np.ndarray:
        return self.data["delta"].to_numpy()

    def errors(self, estimator: str) -> np.ndarray:
        return self.data[ERROR_PREFIX + EstimatorKind(estimator).value].to_numpy()

    def row(self, delta: float) -> pd.Series:
        matches = self.data[np.isclose(self.data["delta"], delta, rtol=0, atol=1e-12)]
        if matches.empty:
            raise KeyError(f"delta={delta} is not on the report grid")
        return matches.iloc[0]


def worst_case(report: ErrorReport, estimator: str) -> WorstCase:
    """Row maximizing the estimator's error; ties go to the smaller |delta|."""
    errors = report.errors(estimator)
    deltas = report.deltas
    candidates = np.flatnonzero(errors == errors.max())
    best = min(candidates, key=lambda i: (abs(deltas[i]), deltas[i]))
    return WorstCase(float(deltas[best]), float(errors[best]))


def worst_case_gain_db(report: ErrorReport, baseline: str = EstimatorKind.RTS_SMOOTHER.value,
                       candidate: str = EstimatorKind.ROBUST_SMOOTHER.value) -> float:
    """How many dB the candidate's worst-case error sits below the baseline's."""
    return to_db(worst_case(report, baseline).error) - to_db(worst_case(report, candidate).error)


def summarize_worst_case(report: ErrorReport, estimators: Optional[Sequence[str]] = None) -> pd.DataFrame:
    rows = []
    for estimator in estimators or report.estimators:
        worst = worst_case(report, estimator)
        rows.append({"estimator": estimator, "delta": worst.delta, "error": worst.error, "db": to_db(worst.error)})
    summary = pd.DataFrame.from_records(rows, columns=["estimator", "delta", "error", "db"])
    return summary.set_index("estimator")
