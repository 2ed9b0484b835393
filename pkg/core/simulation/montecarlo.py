"""
Time-domain check of the steady-state error analysis.

The true plant and every estimator are discretized with Euler-Maruyama on the same grid,

    x_{k+1} = x_k + A x_k dt + G sqrt(dt) nu_k,     theta_k = H x_k + J omega_k / sqrt(dt),

and each recursion is run as a linear filter on its scalar input (scipy.signal.lfilter on the ss2tf form). Backward
filters consume the recorded theta in reverse order; no second simulation is drawn.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, validator
from scipy import signal

from core.analysis.engine import (
    ESTIMATORS,
    BackwardPlant,
    ErrorAnalysisEngine,
    EstimatorBank,
    EstimatorKind,
    SmootherCombination,
)
from core.data_structures.trajectory import Trajectory
from core.exceptions import EmptyWindow
from core.filters.filter_base import Combiner, FilterRealization
from core.models.resonant import StateSpaceModel
from core.models.uncertainty import UncertaintyStructure

logger = logging.getLogger(__name__)

MAX_DT = 1e-5
MIN_PERIODS = 100
JACKKNIFE_BLOCKS = 8


class SimConfig(BaseModel):
    dt: float = 1e-6
    t_final: float = 0.2
    discard_fraction: float = 0.1
    trials: int = 16
    seed: int = 0

    class Config:
        allow_mutation = False

    @validator("dt")
    def _resolves_dynamics(cls, v):
        if not 0 < v <= MAX_DT:
            raise ValueError(f"dt must lie in (0, {MAX_DT}], got {v}")
        return v

    @validator("t_final")
    def _positive_horizon(cls, v):
        if not v > 0:
            raise ValueError(f"t_final must be positive, got {v}")
        return v

    @validator("discard_fraction")
    def _window(cls, v):
        if not 0 <= v < 0.45:
            raise ValueError(f"discard_fraction must lie in [0, 0.45), got {v}")
        return v

    @validator("trials")
    def _at_least_one(cls, v):
        if v < 1:
            raise ValueError(f"trials must be at least 1, got {v}")
        return v

    @validator("seed")
    def _unsigned(cls, v):
        if not 0 <= v < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {v}")
        return v

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt)) + 1

    def check_resolves(self, omega_r: float):
        """The horizon has to cover at least 100 resonance periods."""
        minimum = MIN_PERIODS * 2 * np.pi / omega_r
        if self.t_final < minimum:
            raise ValueError(f"t_final={self.t_final} s covers fewer than {MIN_PERIODS} resonance periods (needs {minimum:.4g} s)")


def _propagate(A: np.ndarray, B: np.ndarray, u: np.ndarray, dt: float, input_scale: float) -> np.ndarray:
    """States of x_{k+1} = (I + A dt) x_k + B input_scale u_k from x_0 = 0, shape (len(u), n)."""
    n = A.shape[0]
    Phi = np.eye(n) + A * dt
    Gamma = np.asarray(B, dtype=float).reshape(n, 1) * input_scale
    num, den = signal.ss2tf(Phi, Gamma, np.eye(n), np.zeros((n, 1)))
    return np.column_stack([signal.lfilter(num[i], den, u) for i in range(n)])


def simulate_truth(A_true: np.ndarray, G: np.ndarray, H: np.ndarray, J: float, cfg: SimConfig, trial: int = 0,
                   inject_noise: bool = True) -> Trajectory:
    """One realization of the true plant and its measurement; substream seed + trial, x(0) = 0."""
    n_steps = cfg.n_steps
    times = np.arange(n_steps) * cfg.dt
    if inject_noise:
        rng = np.random.default_rng(cfg.seed + trial)
        nu = rng.standard_normal(n_steps)
        omega = rng.standard_normal(n_steps)
    else:
        nu = np.zeros(n_steps)
        omega = np.zeros(n_steps)
    x = _propagate(np.asarray(A_true, dtype=float), G, nu, cfg.dt, np.sqrt(cfg.dt))
    theta = x @ np.asarray(H, dtype=float).reshape(-1) + J * omega / np.sqrt(cfg.dt)
    return Trajectory.from_arrays(times, x, theta, metadata={"trial": trial, "seed": cfg.seed + trial})


def run_filter(traj: Trajectory, filt: FilterRealization) -> np.ndarray:
    """Estimate series on the trajectory grid; backward filters start from x_hat(T) = 0 and run towards t = 0."""
    filt = filt.estimate_form()
    theta = traj.theta if filt.is_forward else traj.theta[::-1]
    estimates = _propagate(filt.A_f, filt.B_f, theta, traj.dt, traj.dt)
    return estimates if filt.is_forward else estimates[::-1]


def run_smoother(traj: Trajectory, fwd: FilterRealization, bwd: FilterRealization, combiner: Combiner) -> np.ndarray:
    return combiner.combine(run_filter(traj, fwd), run_filter(traj, bwd))


def _retained(n_samples: int, discard_fraction: float) -> slice:
    start = int(np.floor(discard_fraction * n_samples))
    window = slice(start, n_samples - start)
    if n_samples - 2 * start <= 0:
        raise EmptyWindow(f"discarding {discard_fraction:.0%} at each end of {n_samples} samples leaves nothing")
    return window


def empirical_mse(true_series: np.ndarray, estimate_series: np.ndarray, discard_fraction: float) -> Tuple[float, float]:
    """
    Mean of (true - estimate)^2 over the central window of every trial, with the standard error from the spread
    between trials. A single trial falls back to a delete-one-block jackknife over 8 equal blocks.
    """
    true_series = np.atleast_2d(np.asarray(true_series, dtype=float))
    estimate_series = np.atleast_2d(np.asarray(estimate_series, dtype=float))
    if true_series.shape != estimate_series.shape:
        raise ValueError(f"series shapes differ: {true_series.shape} vs {estimate_series.shape}")
    window = _retained(true_series.shape[1], discard_fraction)
    squared = (true_series[:, window] - estimate_series[:, window]) ** 2
    per_trial = squared.mean(axis=1)
    mse = float(per_trial.mean())
    if len(per_trial) > 1:
        return mse, float(per_trial.std(ddof=1) / np.sqrt(len(per_trial)))
    blocks = np.array_split(squared[0], JACKKNIFE_BLOCKS)
    if min(len(b) for b in blocks) == 0:
        raise EmptyWindow(f"retained window is shorter than {JACKKNIFE_BLOCKS} samples")
    sums = np.array([b.sum() for b in blocks])
    sizes = np.array([len(b) for b in blocks])
    leave_one_out = (sums.sum() - sums) / (sizes.sum() - sizes)
    g = JACKKNIFE_BLOCKS
    variance = (g - 1) / g * np.sum((leave_one_out - leave_one_out.mean()) ** 2)
    return mse, float(np.sqrt(variance))


class MonteCarloRunner:
    """Simulates trials of the true plant at one delta and collects the phase error of each estimator."""

    def __init__(self, ss: StateSpaceModel, unc: UncertaintyStructure, cfg: SimConfig,
                 estimators: Optional[Sequence[str]] = None, bank: Optional[EstimatorBank] = None):
        self.ss = ss
        self.unc = unc
        self.cfg = cfg
        self.estimators = [EstimatorKind(e) for e in (estimators or ESTIMATORS)]
        needs_robust = any(e.is_robust for e in self.estimators)
        self.bank = bank or EstimatorBank.design(ss, unc if needs_robust else None)

    def estimates(self, traj: Trajectory) -> Dict[str, np.ndarray]:
        """Phase estimate series of every selected estimator on one trajectory."""
        out = {}
        for robust in (False, True):
            kinds = [e for e in self.estimators if e.is_robust == robust]
            if not kinds:
                continue
            fwd, bwd, combiner = self.bank.family(robust)
            forward = run_filter(traj, fwd)
            for kind in kinds:
                if kind.is_smoother:
                    out[kind.value] = combiner.combine(forward, run_filter(traj, bwd))[:, 0]
                else:
                    out[kind.value] = forward[:, 0]
        return out

    def trial(self, A_true: np.ndarray, trial: int) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        traj = simulate_truth(A_true, self.ss.G, self.ss.H, self.ss.J, self.cfg, trial=trial)
        return traj.phi, self.estimates(traj)

    def run(self, delta: float, workers: int = 1) -> Dict[str, Tuple[float, float]]:
        A_true = ErrorAnalysisEngine(self.ss, self.unc, bank=self.bank).true_dynamics(delta)
        trials = range(self.cfg.trials)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(lambda k: self.trial(A_true, k), trials))
        else:
            results = [self.trial(A_true, k) for k in trials]
        truth = np.vstack([phi for phi, _ in results])
        return {kind.value: empirical_mse(truth, np.vstack([est[kind.value] for _, est in results]), self.cfg.discard_fraction)
                for kind in self.estimators}


def smoother_agreement(traj: Trajectory, bank: EstimatorBank) -> float:
    """Relative RMS difference between the robust and RTS smoothed phase trajectories."""
    rts = run_smoother(traj, *bank.family(False))[:, 0]
    robust = run_smoother(traj, *bank.family(True))[:, 0]
    return float(np.sqrt(np.mean((robust - rts) ** 2)) / np.sqrt(np.mean(rts ** 2)))


def run_monte_carlo(ss: StateSpaceModel, unc: UncertaintyStructure, deltas: Sequence[float], cfg: SimConfig,
                    estimators: Optional[Sequence[str]] = None, workers: int = 1,
                    backward_plant: BackwardPlant = BackwardPlant.REVERSED) -> pd.DataFrame:
    """
    Empirical against analytic phase error for every (estimator, delta).

    The simulated smoother outputs W_f x_hat_f + W_b x_hat_b, so its analytic counterpart is the matrix combination,
    which in turn needs the time-reversed backward plant.
    """
    runner = MonteCarloRunner(ss, unc, cfg, estimators)
    engine = ErrorAnalysisEngine(ss, unc, backward_plant=backward_plant,
                                 smoother_combination=SmootherCombination.MATRIX, bank=runner.bank)
    rows: List[Dict[str, float]] = []
    for delta in deltas:
        empirical = runner.run(float(delta), workers=workers)
        for kind in runner.estimators:
            analytic = engine.evaluate(float(delta), kind)
            mse, std_error = empirical[kind.value]
            z_score = (mse - analytic) / std_error if std_error > 0 else float("nan")
            rows.append({"estimator": kind.value, "delta": float(delta), "mu": unc.mu, "analytic_mse": analytic,
                         "empirical_mse": mse, "std_error": std_error, "z_score": z_score})
            logger.info(f"mu={unc.mu} delta={delta:+.3f} {kind.value}: analytic {analytic:.6g}, empirical {mse:.6g} "
                        f"+/- {std_error:.2g} (z={z_score:+.2f})")
    return pd.DataFrame.from_records(rows, columns=["estimator", "delta", "mu", "analytic_mse", "empirical_mse",
                                                    "std_error", "z_score"])
