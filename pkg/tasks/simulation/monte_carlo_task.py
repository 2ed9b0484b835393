import logging

from core.cli import cmd_mc
from tasks.run_config_task import RunConfigTask

logger = logging.getLogger(__name__)


class MonteCarloTask(RunConfigTask):
    default_file_name = "mc_mu{mu}.csv"

    def execute(self):
        cfg = self.run_config()
        logger.info(f"Monte Carlo at mu={cfg.mu}, deltas={cfg.deltas}, {cfg.trials} trials of {cfg.t_final} s")
        return cmd_mc(cfg)
