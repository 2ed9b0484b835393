from itertools import combinations

import numpy as np
import pytest
from pydantic import ValidationError

from core.analysis.engine import EstimatorBank, EstimatorKind
from core.exceptions import EmptyWindow
from core.filters.filter_base import Combiner
from core.simulation.montecarlo import (
    MonteCarloRunner,
    SimConfig,
    empirical_mse,
    run_filter,
    run_monte_carlo,
    run_smoother,
    simulate_truth,
    smoother_agreement,
)
from core.solvers import solve_lyapunov

# a little over 100 resonance periods at the default omega_r
SHORT = dict(dt=1e-6, t_final=0.12, discard_fraction=0.1, trials=8, seed=11)
# Euler-Maruyama bias on top of the statistical error
DISCRETIZATION_ALLOWANCE = 0.05


def _agrees(empirical, std_error, analytic):
    return abs(empirical - analytic) <= 3 * std_error + DISCRETIZATION_ALLOWANCE * analytic


def test_sim_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(dt=1e-4)
    with pytest.raises(ValidationError):
        SimConfig(discard_fraction=0.45)
    with pytest.raises(ValidationError):
        SimConfig(trials=0)
    cfg = SimConfig(t_final=0.01)
    with pytest.raises(ValueError):
        cfg.check_resolves(6.283e3)
    SimConfig(**SHORT).check_resolves(6.283e3)
    assert SimConfig(dt=1e-6, t_final=1e-3).n_steps == 1001


def test_zero_noise_gives_zero_trajectory(ss):
    cfg = SimConfig(t_final=1e-3)
    traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, inject_noise=False)
    assert len(traj) == cfg.n_steps
    assert not np.any(traj.x) and not np.any(traj.theta)


def test_zero_measurement_gives_zero_estimate(ss, kalman_pair):
    cfg = SimConfig(t_final=1e-3)
    traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, inject_noise=False)
    for design in kalman_pair:
        assert not np.any(run_filter(traj, design.realization))


def test_seeds_are_reproducible(ss):
    cfg = SimConfig(t_final=2e-3, seed=5)
    first = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, trial=3)
    second = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, trial=3)
    other = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, trial=4)
    np.testing.assert_array_equal(first.x, second.x)
    np.testing.assert_array_equal(first.theta, second.theta)
    assert not np.array_equal(first.theta, other.theta)


def test_degenerate_combiner_returns_forward_filter(ss, kalman_pair):
    kf, kb = kalman_pair
    traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, SimConfig(t_final=2e-3))
    forward_only = Combiner(W_f=np.eye(2), W_b=np.zeros((2, 2)), covariance_proxy=np.eye(2))
    np.testing.assert_allclose(run_smoother(traj, kf.realization, kb.realization, forward_only), run_filter(traj, kf.realization))


def test_empirical_mse():
    rng = np.random.default_rng(0)
    truth = rng.standard_normal((3, 400))
    assert empirical_mse(truth, truth, 0.1) == (0.0, 0.0)
    mse, _ = empirical_mse(truth, truth + 0.5, 0.1)
    assert mse == pytest.approx(0.25)
    single_mse, single_se = empirical_mse(truth[0], np.zeros(400), 0.1)
    assert single_mse > 0 and np.isfinite(single_se) and single_se > 0
    with pytest.raises(EmptyWindow):
        empirical_mse(truth[:, :2], truth[:, :2], 0.5)
    with pytest.raises(EmptyWindow):
        empirical_mse(truth[0, :4], np.zeros(4), 0.1)
    with pytest.raises(ValueError):
        empirical_mse(truth, truth[:, :10], 0.1)


@pytest.mark.slow
def test_stationary_variance(ss):
    cfg = SimConfig(**SHORT)
    truth = np.vstack([simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, trial=k).phi for k in range(cfg.trials)])
    mse, std_error = empirical_mse(truth, np.zeros_like(truth), cfg.discard_fraction)
    Sigma = solve_lyapunov(ss.A, ss.G @ ss.G.T)
    assert _agrees(mse, std_error, Sigma[0, 0])


@pytest.mark.slow
def test_kalman_filters_match_their_covariances(ss, uncertainty, kalman_pair):
    kf, kb = kalman_pair
    runner = MonteCarloRunner(ss, uncertainty(0.0), SimConfig(**SHORT), estimators=["kalman_filter"])
    mse, std_error = runner.run(0.0)["kalman_filter"]
    assert _agrees(mse, std_error, kf.P[0, 0])
    cfg = SimConfig(**SHORT)
    truth, backward = [], []
    for k in range(cfg.trials):
        traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, trial=k)
        truth.append(traj.phi)
        backward.append(run_filter(traj, kb.realization)[:, 0])
    mse, std_error = empirical_mse(np.vstack(truth), np.vstack(backward), cfg.discard_fraction)
    assert _agrees(mse, std_error, kb.P[0, 0])


@pytest.mark.slow
def test_robust_and_rts_smoothers_coincide_without_uncertainty(ss, uncertainty):
    bank = EstimatorBank.design(ss, uncertainty(0.0))
    traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, SimConfig(seed=3))
    assert smoother_agreement(traj, bank) < 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("mu, delta", [(0.5, 0.0), (0.8, 1.0), (0.8, -1.0)])
def test_analytic_agreement(ss, uncertainty, mu, delta):
    results = run_monte_carlo(ss, uncertainty(mu), [delta], SimConfig(**SHORT))
    assert list(results.columns) == ["estimator", "delta", "mu", "analytic_mse", "empirical_mse", "std_error", "z_score"]
    assert set(results["estimator"]) == {kind.value for kind in EstimatorKind}
    for _, row in results.iterrows():
        assert _agrees(row.empirical_mse, row.std_error, row.analytic_mse), row.estimator


def test_monte_carlo_is_deterministic(ss, uncertainty):
    cfg = SimConfig(t_final=2e-3, trials=2, seed=9, discard_fraction=0.2)
    first = run_monte_carlo(ss, uncertainty(0.5), [0.0], cfg, estimators=["kalman_filter", "robust_smoother"])
    second = run_monte_carlo(ss, uncertainty(0.5), [0.0], cfg, estimators=["kalman_filter", "robust_smoother"])
    assert first.equals(second)


def test_standard_error_scales_with_trials():
    per_trial = np.tile([1.0, 2.0, 3.0, 4.0], 4)
    estimate = np.sqrt(per_trial)[:, None] * np.ones((16, 100))
    truth = np.zeros_like(estimate)
    mse_4, se_4 = empirical_mse(truth[:4], estimate[:4], 0.1)
    mse_16, se_16 = empirical_mse(truth, estimate, 0.1)
    assert mse_4 == pytest.approx(2.5) and mse_16 == pytest.approx(2.5)
    assert se_4 == pytest.approx(np.sqrt(5 / 3) / 2)
    assert se_16 == pytest.approx(np.sqrt(4 / 3) / 4)


def test_matrix_analytic_needs_reversed_backward_plant(ss, uncertainty):
    with pytest.raises(ValueError, match="reversed"):
        run_monte_carlo(ss, uncertainty(0.5), [0.0], SimConfig(t_final=2e-3, trials=1), backward_plant="forward")


@pytest.mark.slow
def test_standard_error_shrinks_from_4_to_16_trials(ss, kalman_pair):
    kf, _ = kalman_pair
    cfg = SimConfig(dt=1e-6, t_final=0.12, trials=16, seed=21)
    truth, estimate = [], []
    for k in range(cfg.trials):
        traj = simulate_truth(ss.A, ss.G, ss.H, ss.J, cfg, trial=k)
        truth.append(traj.phi)
        estimate.append(run_filter(traj, kf.realization)[:, 0])
    truth, estimate = np.vstack(truth), np.vstack(estimate)
    _, se_16 = empirical_mse(truth, estimate, cfg.discard_fraction)
    per_trial = np.array([empirical_mse(t, e, cfg.discard_fraction)[0] for t, e in zip(truth, estimate)])
    assert se_16 == pytest.approx(per_trial.std(ddof=1) / 4)
    # expected 4-trial standard error over every 4-trial subset of the same draws
    se_4 = np.mean([per_trial[list(subset)].std(ddof=1) / 2 for subset in combinations(range(cfg.trials), 4)])
    assert se_4 / se_16 >= 1.3


@pytest.mark.slow
@pytest.mark.parametrize("mu, delta", [(0.0, 0.0), (0.5, 0.0), (0.8, 1.0), (0.8, -1.0)])
def test_analytic_agreement_at_acceptance_settings(ss, uncertainty, mu, delta):
    cfg = SimConfig()
    assert (cfg.dt, cfg.t_final, cfg.trials) == (1e-6, 0.2, 16)
    results = run_monte_carlo(ss, uncertainty(mu), [delta], cfg, workers=4)
    for _, row in results.iterrows():
        assert abs(row.z_score) <= 3, row.estimator
