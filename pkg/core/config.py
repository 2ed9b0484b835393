"""
Run configuration: built-in defaults < config file (--config, else $RSK_CONFIG) < command-line flags.

A config file is a flat YAML mapping of RunConfig fields. A CSV written by this package can also be given as the
config file; its embedded '# config:' block is read back, so any output can be regenerated from itself.
"""
import logging
import os
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, root_validator, validator

from core.analysis.engine import ESTIMATORS, BackwardPlant, SmootherCombination, check_conventions
from core.data_structures.data_structure_base import read_metadata
from core.models.defaults import DEFAULT_GRID_SIZE, DEFAULT_MU, DEFAULT_PARAMS, DEFAULTS_VERSION
from core.models.measurement import SqueezingParams
from core.models.resonant import ResonantParams
from core.simulation.montecarlo import SimConfig
from core.utils import load_dict_from_yaml

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "RSK_CONFIG"


class ConfigError(ValueError):
    pass


class RunConfig(BaseModel):
    kappa: float = DEFAULT_PARAMS["kappa"]
    zeta: float = DEFAULT_PARAMS["zeta"]
    omega_r: float = DEFAULT_PARAMS["omega_r"]
    alpha_mag: float = DEFAULT_PARAMS["alpha_mag"]
    r_m: float = DEFAULT_PARAMS["r_m"]
    r_p: float = DEFAULT_PARAMS["r_p"]
    mu: float = DEFAULT_MU
    state: str = "coherent"
    grid: int = DEFAULT_GRID_SIZE
    estimators: List[str] = list(ESTIMATORS)
    backward_plant: BackwardPlant = BackwardPlant.REVERSED
    smoother_combination: SmootherCombination = SmootherCombination.SCALAR
    deltas: List[float] = [0.0]
    dt: float = 1e-6
    t_final: float = 0.2
    discard_fraction: float = 0.1
    trials: int = 16
    seed: int = 0
    workers: int = 1
    out: Optional[str] = None

    class Config:
        extra = "forbid"
        use_enum_values = True

    @validator("mu")
    def _level(cls, v):
        if not 0 <= v < 1:
            raise ValueError(f"mu must lie in [0, 1), got {v}")
        return v

    @validator("state")
    def _state(cls, v):
        if v not in ("coherent", "squeezed"):
            raise ValueError(f"state must be coherent or squeezed, got {v}")
        return v

    @validator("grid")
    def _odd_grid(cls, v):
        if v < 1 or v % 2 == 0:
            raise ValueError(f"grid size must be a positive odd integer so that delta=0 is on the grid, got {v}")
        return v

    @validator("estimators", pre=True)
    def _known_estimators(cls, v):
        if isinstance(v, str):
            v = [item.strip() for item in v.split(",") if item.strip()]
        unknown = [e for e in v if e not in ESTIMATORS]
        if unknown or not v:
            raise ValueError(f"estimators must be a non-empty subset of {ESTIMATORS}, got {v}")
        return [e for e in ESTIMATORS if e in v]

    @validator("deltas", pre=True)
    def _deltas(cls, v):
        if isinstance(v, (int, float)):
            v = [v]
        if isinstance(v, str):
            v = [float(item) for item in v.split(",") if item.strip()]
        if not v or any(abs(d) > 1 for d in v):
            raise ValueError(f"deltas must be a non-empty list inside [-1, 1], got {v}")
        return v

    @validator("workers")
    def _workers(cls, v):
        if v < 1:
            raise ValueError(f"workers must be at least 1, got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def _consistent_conventions(cls, values):
        check_conventions(values["backward_plant"], values["smoother_combination"])
        return values

    @property
    def resonant(self) -> ResonantParams:
        return ResonantParams(kappa=self.kappa, zeta=self.zeta, omega_r=self.omega_r)

    @property
    def squeezing(self) -> SqueezingParams:
        return SqueezingParams(alpha_mag=self.alpha_mag, r_m=self.r_m, r_p=self.r_p)

    @property
    def sim(self) -> SimConfig:
        return SimConfig(dt=self.dt, t_final=self.t_final, discard_fraction=self.discard_fraction, trials=self.trials,
                         seed=self.seed)

    def validate_models(self) -> "RunConfig":
        """Builds every parameter object once so that model invariants surface as config errors."""
        _ = (self.resonant, self.squeezing, self.sim)
        return self

    def embedded(self) -> Dict[str, Any]:
        """Effective configuration as written into output files; `out` is left out so a re-run can pick its own."""
        return {"defaults_version": DEFAULTS_VERSION, "config": self.dict(exclude={"out"})}


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    if path.endswith(".csv"):
        values = read_metadata(path).get("config")
        if values is None:
            raise ConfigError(f"{path} has no embedded config block")
        return values
    try:
        values = load_dict_from_yaml(path) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"could not parse {path}: {e}") from e
    if not isinstance(values, dict):
        raise ConfigError(f"{path} must hold a flat key: value mapping")
    return values


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    load_dotenv()
    path = path or os.getenv(CONFIG_ENV_VAR)
    values: Dict[str, Any] = {}
    if path:
        values.update(read_config_file(path))
        logger.info(f"Loaded configuration from {path}")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values).validate_models()
