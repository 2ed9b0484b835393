"""
Command-line front end.

    sweep     steady-state errors of the four estimators over the delta grid
    validate  acceptance checks at the built-in operating point
    mc        Monte Carlo against analytic errors
    bode      frequency response of the phase-noise process

Exit codes: 0 success, 1 configuration error, 2 infeasible robust design, 3 validation failure.
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from core.analysis.sweep import delta_grid, sweep_delta
from core.analysis.validation import ValidationReport, run_validation
from core.config import RunConfig, load_run_config
from core.data_structures.data_structure_base import DataStructureBase
from core.data_structures.error_report import ErrorReport, summarize_worst_case, worst_case_gain_db
from core.exceptions import EstimationError, InfeasibleUncertaintyLevel
from core.models import coherent_model
from core.models.resonant import frequency_response_table
from core.models.uncertainty import build_uncertainty
from core.simulation.montecarlo import run_monte_carlo

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_VALIDATION = 3


def _emit(result: DataStructureBase, out: Optional[str]):
    if out:
        result.to_csv(out)
        logger.info(f"Wrote {len(result.data)} rows to {out}")
    else:
        sys.stdout.write(result.to_csv_string())


def cmd_sweep(cfg: RunConfig) -> ErrorReport:
    ss = coherent_model(cfg.resonant, cfg.alpha_mag)
    unc = build_uncertainty(cfg.resonant, cfg.mu)
    report = sweep_delta(ss, unc, delta_grid(cfg.grid), state_kind=cfg.state,
                         sq=cfg.squeezing if cfg.state == "squeezed" else None, estimators=cfg.estimators,
                         workers=cfg.workers, progress=cfg.grid > 1, backward_plant=cfg.backward_plant,
                         smoother_combination=cfg.smoother_combination)
    summary = summarize_worst_case(report)
    worst = {name: {"delta": float(r.delta), "error": float(r.error), "db": float(r.db)} for name, r in summary.iterrows()}
    report.metadata = {**cfg.embedded(), **report.metadata, "worst_case": worst}
    if {"rts_smoother", "robust_smoother"} <= set(report.estimators):
        gain = worst_case_gain_db(report)
        report.metadata["worst_case"]["robust_smoother_gain_db"] = float(gain)
        logger.info(f"Worst-case robust smoother improvement over RTS: {gain:.3f} dB")
    _emit(report, cfg.out)
    return report


def cmd_validate(kappa_scale: float = 1.0, full: bool = True, grid: Optional[int] = None, out: Optional[str] = None,
                 workers: int = 1) -> ValidationReport:
    options: Dict[str, Any] = {"kappa_scale": kappa_scale, "full": full, "workers": workers}
    if grid is not None:
        options["grid_size"] = grid
    report = run_validation(**options)
    print(report.table())
    if out:
        report.to_csv(out)
    return report


def cmd_mc(cfg: RunConfig) -> DataStructureBase:
    cfg.sim.check_resolves(cfg.omega_r)
    ss = coherent_model(cfg.resonant, cfg.alpha_mag)
    unc = build_uncertainty(cfg.resonant, cfg.mu)
    results = run_monte_carlo(ss, unc, cfg.deltas, cfg.sim, estimators=cfg.estimators, workers=cfg.workers,
                              backward_plant=cfg.backward_plant)
    result = DataStructureBase(results, cfg.embedded())
    _emit(result, cfg.out)
    return result


def cmd_bode(cfg: RunConfig) -> DataStructureBase:
    result = DataStructureBase(frequency_response_table(cfg.resonant), cfg.embedded())
    _emit(result, cfg.out)
    return result


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="YAML config file (or a CSV produced by this tool); defaults to $RSK_CONFIG")
    parser.add_argument("--state", choices=["coherent", "squeezed"])
    parser.add_argument("--mu", type=float, help="uncertainty level in [0, 1)")
    parser.add_argument("--grid", type=int, help="odd number of delta grid points on [-1, 1]")
    parser.add_argument("--estimators", help="comma-separated subset of the four estimators")
    parser.add_argument("--deltas", help="comma-separated deltas for the mc subcommand")
    parser.add_argument("--backward-plant", choices=["reversed", "forward"])
    parser.add_argument("--smoother-combination", choices=["matrix", "scalar"])
    parser.add_argument("--dt", type=float)
    parser.add_argument("--t-final", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output CSV path; stdout when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsk", description="Robust and optimal smoothing of resonant phase noise")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("sweep", "estimator errors over the delta grid"),
                            ("mc", "Monte Carlo against the analytic errors"),
                            ("bode", "frequency response of the phase-noise process")):
        _add_run_flags(subparsers.add_parser(name, help=help_text))
    validate = subparsers.add_parser("validate", help="acceptance checks at the built-in defaults")
    validate.add_argument("--quick", action="store_true", help="skip the delta sweeps")
    validate.add_argument("--grid", type=int)
    validate.add_argument("--workers", type=int, default=1)
    validate.add_argument("--out")
    validate.add_argument("--kappa-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    keys = ["state", "mu", "grid", "estimators", "deltas", "backward_plant", "smoother_combination", "dt", "t_final",
            "trials", "seed", "workers", "out"]
    return {key: getattr(args, key) for key in keys}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        if args.command == "validate":
            report = cmd_validate(args.kappa_scale, full=not args.quick, grid=args.grid, out=args.out, workers=args.workers)
            if not report.passed:
                logger.error(f"{len(report.failures)} validation check(s) failed")
                return EXIT_VALIDATION
            return EXIT_OK
        cfg = load_run_config(args.config, _overrides(args))
        {"sweep": cmd_sweep, "mc": cmd_mc, "bode": cmd_bode}[args.command](cfg)
    except InfeasibleUncertaintyLevel as e:
        logger.error(str(e))
        return EXIT_INFEASIBLE
    except (ValidationError, ValueError, EstimationError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
