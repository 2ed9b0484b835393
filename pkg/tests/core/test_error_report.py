import numpy as np
import pandas as pd
import pytest

from core.data_structures import ErrorReport, read_csv, read_metadata, summarize_worst_case, worst_case, worst_case_gain_db
from core.exceptions import NonPositiveInput
from core.features.decibel import to_db


def _rows(errors_rts, errors_robust, deltas=None):
    deltas = deltas if deltas is not None else np.linspace(-1, 1, len(errors_rts))
    return [{"delta": d, "mu": 0.8, "state": "coherent", "rts_smoother": a, "robust_smoother": b}
            for d, a, b in zip(deltas, errors_rts, errors_robust)]


def test_to_db():
    assert to_db(1.0) == 0.0
    assert to_db(0.1) == pytest.approx(-10.0)
    assert to_db(3.7748607e-3) == pytest.approx(-24.231, abs=1e-3)
    np.testing.assert_allclose(to_db(np.array([1.0, 10.0])), [0.0, 10.0])
    for bad in (0.0, -1.0, np.nan):
        with pytest.raises(NonPositiveInput):
            to_db(bad)


def test_report_columns_and_db():
    report = ErrorReport.from_rows(_rows([1e-2, 2e-2, 4e-2], [2e-2, 2e-2, 2e-2]))
    assert list(report.data.columns) == ["delta", "mu", "state", "err_rts_smoother", "err_robust_smoother",
                                         "db_rts_smoother", "db_robust_smoother"]
    np.testing.assert_allclose(report.data["db_rts_smoother"], 10 * np.log10([1e-2, 2e-2, 4e-2]))
    assert report.estimators == ["rts_smoother", "robust_smoother"]


def test_report_invariants():
    with pytest.raises(ValueError):
        ErrorReport.from_rows(_rows([1e-2, 2e-2], [1e-2, 1e-2], deltas=[0.5, 0.0]))
    with pytest.raises(ValueError):
        ErrorReport.from_rows(_rows([1e-2, 0.0], [1e-2, 1e-2]))
    with pytest.raises(ValueError):
        ErrorReport.from_rows([])
    with pytest.raises(ValueError):
        ErrorReport(pd.DataFrame({"delta": [0.0], "mu": [0.5], "state": ["thermal"], "err_rts_smoother": [1.0]}))


def test_worst_case():
    report = ErrorReport.from_rows(_rows([3e-2, 1e-2, 2e-2], [1e-2, 1e-2, 1e-2]))
    assert worst_case(report, "rts_smoother") == (-1.0, 3e-2)
    single = ErrorReport.from_rows(_rows([5e-3], [4e-3], deltas=[0.0]))
    assert worst_case(single, "robust_smoother") == (0.0, 4e-3)


def test_worst_case_ties_go_to_smaller_detuning():
    report = ErrorReport.from_rows(_rows([2e-2, 2e-2, 1e-2, 2e-2, 1e-2], [1e-2] * 5, deltas=[-1.0, -0.5, 0.0, 0.25, 1.0]))
    assert worst_case(report, "rts_smoother").delta == 0.25


def test_db_preserves_the_argmax():
    errors = np.array([3e-3, 9e-3, 4e-3, 8e-3])
    report = ErrorReport.from_rows(_rows(errors, errors / 2))
    assert np.argmax(report.data["db_rts_smoother"].to_numpy()) == np.argmax(report.errors("rts_smoother"))


def test_summary_and_gain():
    report = ErrorReport.from_rows(_rows([1e-2, 4e-2], [1e-2, 2e-2]))
    summary = summarize_worst_case(report)
    assert list(summary.index) == ["rts_smoother", "robust_smoother"]
    assert summary.loc["rts_smoother", "error"] == 4e-2
    assert worst_case_gain_db(report) == pytest.approx(10 * np.log10(2))


def test_csv_carries_metadata(tmp_path):
    report = ErrorReport.from_rows(_rows([1e-2, 4e-2], [1e-2, 2e-2]), metadata={"config": {"mu": 0.8, "grid": 3}})
    path = tmp_path / "report.csv"
    report.to_csv(str(path))
    text = path.read_text()
    assert text.splitlines()[0].startswith("delta,mu,state,err_rts_smoother")
    assert "# config:" in text
    assert read_metadata(str(path)) == {"config": {"mu": 0.8, "grid": 3}}
    frame = read_csv(str(path))
    np.testing.assert_allclose(frame["err_rts_smoother"], [1e-2, 4e-2])
