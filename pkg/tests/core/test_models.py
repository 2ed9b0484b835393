import numpy as np
import pytest
from pydantic import ValidationError

from core.exceptions import DeltaOutOfRange, SqueezingOutOfRange
from core.models import (
    ResonantParams,
    SqueezingParams,
    apply_uncertainty,
    build_coherent_measurement,
    build_process,
    build_squeezed_measurement,
    build_uncertainty,
    frequency_response_mag,
    frequency_response_table,
    squeezed_noise_factor,
)


def test_process_poles(params):
    A, G = build_process(params)
    poles = np.sort_complex(np.linalg.eigvals(A))
    w, z = params.omega_r, params.zeta
    expected = np.sort_complex(np.array([-z * w - 1j * w * np.sqrt(1 - z ** 2), -z * w + 1j * w * np.sqrt(1 - z ** 2)]))
    np.testing.assert_allclose(poles, expected, rtol=1e-12)
    np.testing.assert_array_equal(G, [[0.0], [params.kappa]])


@pytest.mark.parametrize("kwargs", [{"zeta": 1.0}, {"zeta": 0.0}, {"kappa": -1.0}, {"omega_r": 0.0}])
def test_resonant_params_validation(kwargs):
    with pytest.raises(ValidationError):
        ResonantParams(**kwargs)


def test_frequency_response(params):
    w, z, k = params.omega_r, params.zeta, params.kappa
    magnitude, magnitude_db = frequency_response_mag(params, np.array([0.0, w]))
    assert magnitude[0] == pytest.approx(k / w ** 2)
    assert magnitude[1] == pytest.approx(k / (2 * z * w ** 2))
    assert magnitude_db[1] == pytest.approx(20 * np.log10(k / (2 * z * w ** 2)))
    with pytest.raises(ValueError):
        frequency_response_mag(params, -1.0)


def test_frequency_response_table(params):
    w = params.omega_r
    table = frequency_response_table(params, omegas=[w / 100, w, 100 * w])
    assert list(table.columns) == ["omega", "frequency_hz", "magnitude", "magnitude_db", "phase_deg"]
    assert table["phase_deg"].iloc[1] == pytest.approx(-90.0)
    assert -180.0 < table["phase_deg"].iloc[2] < -179.0
    assert len(frequency_response_table(params, n_points=50)) == 50
    assert params.peak_frequency < w


def test_coherent_measurement():
    H, J = build_coherent_measurement(500.0)
    np.testing.assert_array_equal(H, [[1000.0, 0.0]])
    assert J == 1.0
    with pytest.raises(ValueError):
        build_coherent_measurement(0.0)


def test_squeezed_noise_factor(squeezing):
    unsqueezed = SqueezingParams(r_m=0.0, r_p=0.0)
    assert squeezed_noise_factor(unsqueezed, 0.3) == pytest.approx(1.0)
    assert squeezed_noise_factor(squeezing, 0.0) == pytest.approx(np.exp(-2 * 0.36))
    assert squeezed_noise_factor(squeezing, 1.0) == pytest.approx(np.exp(2 * 0.59))
    with pytest.raises(SqueezingOutOfRange):
        squeezed_noise_factor(squeezing, 1.5)
    with pytest.raises(SqueezingOutOfRange):
        squeezed_noise_factor(squeezing, -0.1)


def test_squeezed_measurement(squeezing):
    H, r_sq = build_squeezed_measurement(squeezing, 0.01)
    assert r_sq < 1
    assert H[0, 0] == pytest.approx(2 * squeezing.alpha_mag / np.sqrt(r_sq))
    assert H[0, 1] == 0.0


def test_squeezing_params_validation():
    with pytest.raises(ValidationError):
        SqueezingParams(r_m=0.6, r_p=0.5)
    with pytest.raises(ValidationError):
        SqueezingParams(alpha_mag=0.0)


def test_uncertainty_shifts_resonance(params):
    unc = build_uncertainty(params, 0.8)
    assert unc.K[0, 0] == pytest.approx(-0.8 * params.omega_r ** 2 / params.kappa)
    A, G = build_process(params)
    for delta in (-1.0, 0.0, 0.5, 1.0):
        A_true = apply_uncertainty(A, G, unc, delta)
        assert A_true[1, 0] == pytest.approx(-params.omega_r ** 2 * (1 + 0.8 * delta))
        np.testing.assert_array_equal(A_true[0], A[0])
        assert A_true[1, 1] == A[1, 1]


def test_uncertainty_bounds(params):
    A, G = build_process(params)
    with pytest.raises(DeltaOutOfRange):
        apply_uncertainty(A, G, build_uncertainty(params, 0.5), 1.01)
    with pytest.raises(ValueError):
        build_uncertainty(params, 1.0)
    np.testing.assert_array_equal(build_uncertainty(params, 0.0).K, np.zeros((2, 2)))


def test_peak_frequency_is_the_magnitude_maximum(params):
    w = params.omega_r
    omegas = np.linspace(0.5 * w, 1.5 * w, 200001)
    magnitude, _ = frequency_response_mag(params, omegas)
    assert omegas[np.argmax(magnitude)] == pytest.approx(params.peak_frequency, rel=1e-5)
    assert params.peak_frequency == pytest.approx(w * np.sqrt(1 - 2 * params.zeta ** 2))


def test_squeezed_noise_factor_ordering(squeezing):
    low, high = np.exp(-2 * squeezing.r_m), np.exp(2 * squeezing.r_p)
    sigmas = np.linspace(0.0, 1.0, 51)
    factors = np.array([squeezed_noise_factor(squeezing, s) for s in sigmas])
    assert np.all(np.diff(factors) > 0)
    assert np.all((factors >= low * (1 - 1e-12)) & (factors <= high * (1 + 1e-12)))
    # stronger amplitude squeezing lowers R_sq at a fixed phase error
    by_r_m = [squeezed_noise_factor(SqueezingParams(r_m=r_m, r_p=0.59), 0.01) for r_m in np.linspace(0.0, 0.59, 12)]
    assert np.all(np.diff(by_r_m) < 0)
    by_r_p = [squeezed_noise_factor(SqueezingParams(r_m=0.36, r_p=r_p), 0.01) for r_p in np.linspace(0.36, 1.2, 12)]
    assert np.all(np.diff(by_r_p) > 0)


@pytest.mark.parametrize("mu, delta", [(0.5, -0.3), (0.8, 1.0), (0.7, -1.0)])
def test_uncertainty_is_a_rank_one_feedback(params, mu, delta):
    A, G = build_process(params)
    unc = build_uncertainty(params, mu)
    np.testing.assert_allclose(apply_uncertainty(A, G, unc, delta), A + delta * np.outer(G, unc.K[0]), rtol=1e-12)


def test_largest_detuning_shifts_stiffness_by_mu(params):
    A, G = build_process(params)
    A_true = apply_uncertainty(A, G, build_uncertainty(params, 0.8), 1.0)
    assert A_true[1, 0] == pytest.approx(-7.1057e7, rel=1e-4)
