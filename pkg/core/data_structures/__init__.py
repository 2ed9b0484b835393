from core.data_structures.data_structure_base import DataStructureBase, read_csv, read_metadata
from core.data_structures.error_report import ErrorReport, WorstCase, summarize_worst_case, worst_case, worst_case_gain_db
from core.data_structures.trajectory import Trajectory

__all__ = [
    "DataStructureBase",
    "ErrorReport",
    "Trajectory",
    "WorstCase",
    "read_csv",
    "read_metadata",
    "summarize_worst_case",
    "worst_case",
    "worst_case_gain_db",
]
