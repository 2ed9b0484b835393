import logging

import numpy as np
import pytest

from core.analysis.engine import EstimatorKind
from core.analysis.squeezed import loop_filter_error, squeezed_fixed_point
from core.exceptions import FixedPointNonConvergence
from core.models import SqueezingParams


@pytest.fixture(scope="module")
def unc(uncertainty):
    return uncertainty(0.5)


def test_no_squeezing_is_the_coherent_point(ss, unc):
    sq = SqueezingParams(r_m=0.0, r_p=0.0)
    point = squeezed_fixed_point(ss, unc, 0.0, sq, EstimatorKind.KALMAN_FILTER)
    assert point.iterations == 1
    assert point.R_sq == pytest.approx(1.0)
    assert point.sigma_f_sq == pytest.approx(loop_filter_error(ss, unc, 0.0, EstimatorKind.KALMAN_FILTER), rel=1e-12)


@pytest.mark.parametrize("loop", [EstimatorKind.KALMAN_FILTER, EstimatorKind.ROBUST_FILTER])
def test_squeezing_lowers_the_filtered_error(ss, unc, squeezing, loop):
    point = squeezed_fixed_point(ss, unc, 0.0, squeezing, loop)
    coherent = loop_filter_error(ss, unc, 0.0, loop)
    assert point.sigma_f_sq < coherent
    assert point.R_sq < 1
    assert point.iterations <= 200
    assert point.steps[-1] < 1e-6
    assert point.H[0, 0] > 2 * squeezing.alpha_mag


def test_iterates_contract(ss, unc, squeezing):
    point = squeezed_fixed_point(ss, unc, 0.7, squeezing, EstimatorKind.KALMAN_FILTER)
    assert len(point.history) == point.iterations + 1
    steps = point.steps
    assert np.all(np.diff(steps) <= 0)


def test_iteration_cap(ss, unc, squeezing, caplog):
    with caplog.at_level(logging.WARNING, logger="core.analysis.squeezed"):
        with pytest.raises(FixedPointNonConvergence) as excinfo:
            squeezed_fixed_point(ss, unc, 0.0, squeezing, EstimatorKind.KALMAN_FILTER, tol=0.0, max_iter=3)
    assert excinfo.value.iterations == 3
    assert "last residual" in caplog.text


def test_relaxed_iteration_reaches_the_same_point(ss, unc, squeezing):
    plain = squeezed_fixed_point(ss, unc, 0.5, squeezing, EstimatorKind.ROBUST_FILTER)
    damped = squeezed_fixed_point(ss, unc, 0.5, squeezing, EstimatorKind.ROBUST_FILTER, relaxation=0.5)
    assert damped.sigma_f_sq == pytest.approx(plain.sigma_f_sq, abs=1e-5)
    assert damped.iterations >= plain.iterations
    with pytest.raises(ValueError):
        squeezed_fixed_point(ss, unc, 0.5, squeezing, EstimatorKind.ROBUST_FILTER, relaxation=0.0)


def test_smoothers_are_not_loop_filters(ss, unc, squeezing):
    with pytest.raises(ValueError):
        squeezed_fixed_point(ss, unc, 0.0, squeezing, EstimatorKind.RTS_SMOOTHER)
