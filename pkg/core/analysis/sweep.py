"""
Delta sweeps: every selected estimator designed at the nominal model, evaluated over a grid of true plants.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from core.analysis.engine import (
    ESTIMATORS,
    BackwardPlant,
    ErrorAnalysisEngine,
    EstimatorBank,
    EstimatorKind,
    SmootherCombination,
    check_conventions,
)
from core.analysis.squeezed import squeezed_fixed_point
from core.data_structures.error_report import ErrorReport
from core.exceptions import InfeasibleUncertaintyLevel
from core.models.defaults import DEFAULT_GRID_SIZE
from core.models.measurement import SqueezingParams
from core.models.resonant import StateSpaceModel
from core.models.uncertainty import UncertaintyStructure

logger = logging.getLogger(__name__)

FAMILIES = {
    False: (EstimatorKind.KALMAN_FILTER, EstimatorKind.RTS_SMOOTHER),
    True: (EstimatorKind.ROBUST_FILTER, EstimatorKind.ROBUST_SMOOTHER),
}


def delta_grid(size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Uniform grid on [-1, 1]; odd sizes only so that delta = 0 is a grid point."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"grid size must be a positive odd integer, got {size}")
    if size == 1:
        return np.array([0.0])
    grid = np.linspace(-1.0, 1.0, size)
    grid[size // 2] = 0.0
    return grid


class DeltaSweep:
    """Evaluates one row per delta. Coherent rows share a single estimator bank; squeezed rows redesign per delta."""

    def __init__(self, ss: StateSpaceModel, unc: UncertaintyStructure, state_kind: str = "coherent",
                 sq: Optional[SqueezingParams] = None, estimators: Optional[Sequence[str]] = None,
                 backward_plant: BackwardPlant = BackwardPlant.REVERSED,
                 smoother_combination: SmootherCombination = SmootherCombination.SCALAR):
        if state_kind not in ("coherent", "squeezed"):
            raise ValueError(f"state kind must be coherent or squeezed, got {state_kind}")
        if state_kind == "squeezed" and sq is None:
            raise ValueError("squeezed sweeps need squeezing parameters")
        self.ss = ss
        self.unc = unc
        self.state_kind = state_kind
        self.sq = sq
        self.estimators = [EstimatorKind(e) for e in (estimators or ESTIMATORS)]
        self.engine_options = dict(backward_plant=BackwardPlant(backward_plant),
                                   smoother_combination=SmootherCombination(smoother_combination))
        check_conventions(**self.engine_options)
        self.families = [robust for robust, kinds in FAMILIES.items() if any(k in self.estimators for k in kinds)]
        self._coherent_engine: Optional[ErrorAnalysisEngine] = None
        self.fixed_point_iterations: Dict[float, Dict[str, int]] = {}

    def _bank(self, ss: StateSpaceModel, robust_needed: bool) -> EstimatorBank:
        return EstimatorBank.design(ss, self.unc if robust_needed else None)

    def coherent_engine(self) -> ErrorAnalysisEngine:
        if self._coherent_engine is None:
            bank = self._bank(self.ss, True in self.families)
            self._coherent_engine = ErrorAnalysisEngine(self.ss, self.unc, bank=bank, **self.engine_options)
        return self._coherent_engine

    def _family_errors(self, engine: ErrorAnalysisEngine, delta: float, robust: bool) -> Dict[str, float]:
        filter_kind, smoother_kind = FAMILIES[robust]
        errors = {}
        if smoother_kind in self.estimators:
            decomposition = engine.decompose(delta, robust)
            errors[smoother_kind.value] = decomposition.Pi
            errors[filter_kind.value] = decomposition.filtered
        else:
            errors[filter_kind.value] = engine.filter_error(delta, robust)
        return {k: v for k, v in errors.items() if EstimatorKind(k) in self.estimators}

    def row(self, delta: float) -> Dict[str, float]:
        delta = float(delta)
        try:
            errors = {}
            if self.state_kind == "coherent":
                for robust in self.families:
                    errors.update(self._family_errors(self.coherent_engine(), delta, robust))
            else:
                iterations = {}
                for robust in self.families:
                    loop_kind = FAMILIES[robust][0]
                    point = squeezed_fixed_point(self.ss, self.unc, delta, self.sq, loop_kind)
                    iterations[loop_kind.value] = point.iterations
                    ss_sq = point.model(self.ss)
                    engine = ErrorAnalysisEngine(ss_sq, self.unc, bank=self._bank(ss_sq, robust), **self.engine_options)
                    errors.update(self._family_errors(engine, delta, robust))
                self.fixed_point_iterations[delta] = iterations
        except InfeasibleUncertaintyLevel as e:
            raise InfeasibleUncertaintyLevel(e.mu, e.largest_feasible_mu, reason=f"delta={delta:+.6g}: {e.reason}") from e
        return {"delta": delta, "mu": self.unc.mu, "state": self.state_kind, **errors}

    def run(self, grid: Sequence[float], workers: int = 1, progress: bool = False) -> List[Dict[str, float]]:
        grid = np.asarray(grid, dtype=float)
        if grid.size == 0:
            raise ValueError("delta grid is empty")
        if np.any(np.abs(grid) > self.unc.delta_bound) or np.any(np.diff(grid) <= 0):
            raise ValueError(f"delta grid must be strictly increasing inside [-{self.unc.delta_bound}, {self.unc.delta_bound}]")
        if self.state_kind == "coherent":
            self.coherent_engine()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                rows = list(tqdm(executor.map(self.row, grid), total=len(grid), disable=not progress,
                                 desc=f"{self.state_kind} mu={self.unc.mu}"))
        else:
            rows = [self.row(delta) for delta in tqdm(grid, disable=not progress, desc=f"{self.state_kind} mu={self.unc.mu}")]
        return rows


def sweep_delta(ss: StateSpaceModel, unc: UncertaintyStructure, grid: Sequence[float], state_kind: str = "coherent",
                sq: Optional[SqueezingParams] = None, estimators: Optional[Sequence[str]] = None, workers: int = 1,
                progress: bool = False, backward_plant: BackwardPlant = BackwardPlant.REVERSED,
                smoother_combination: SmootherCombination = SmootherCombination.SCALAR) -> ErrorReport:
    """One report row per grid delta, in grid order; squeezed rows use each family's own fixed point."""
    sweep = DeltaSweep(ss, unc, state_kind, sq, estimators, backward_plant, smoother_combination)
    rows = sweep.run(grid, workers=workers, progress=progress)
    logger.info(f"Swept {len(rows)} deltas ({state_kind}, mu={unc.mu})")
    metadata = {"conventions": {"backward_plant": BackwardPlant(backward_plant).value,
                                "smoother_combination": SmootherCombination(smoother_combination).value,
                                "design_point": "nominal (delta=0)",
                                "squeezed_sigma_f": "loop filter error at the true delta",
                                "backward_combination": "(Y + Z)^-1 (eta + xi), xi = Z x_hat_b"}}
    if sweep.fixed_point_iterations:
        counts = [n for per_delta in sweep.fixed_point_iterations.values() for n in per_delta.values()]
        metadata["fixed_point"] = {"max_iterations": int(max(counts)), "tolerance": 1e-6}
    return ErrorReport.from_rows(rows, metadata)
