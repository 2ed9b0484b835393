import os
from typing import Any, Dict

from core.config import RunConfig, load_run_config
from core.task_base import BaseTask

TASK_ONLY_KEYS = ("output_dir", "file_name", "config_file")


class RunConfigTask(BaseTask):
    """Task whose config block holds RunConfig fields plus output_dir, file_name and an optional config_file."""

    default_file_name = "result.csv"

    def run_config(self) -> RunConfig:
        overrides: Dict[str, Any] = {k: v for k, v in self.config.items() if k not in TASK_ONLY_KEYS}
        cfg = load_run_config(self.config.get("config_file"), overrides)
        output_dir = self.config.get("output_dir", "results")
        os.makedirs(output_dir, exist_ok=True)
        file_name = self.config.get("file_name") or self.default_file_name.format(**cfg.dict())
        return cfg.copy(update={"out": os.path.join(output_dir, file_name)})
