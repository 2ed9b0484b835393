import logging

from core.cli import cmd_sweep
from tasks.run_config_task import RunConfigTask

logger = logging.getLogger(__name__)


class SweepTask(RunConfigTask):
    default_file_name = "sweep_{state}_mu{mu}.csv"

    def execute(self):
        cfg = self.run_config()
        logger.info(f"Sweeping {cfg.grid} deltas ({cfg.state}, mu={cfg.mu}) into {cfg.out}")
        return cmd_sweep(cfg)
