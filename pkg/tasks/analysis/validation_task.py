import logging
import os

from core.cli import cmd_validate
from core.exceptions import EstimationError
from core.task_base import BaseTask

logger = logging.getLogger(__name__)


class ValidationFailed(EstimationError):
    pass


class ValidationTask(BaseTask):
    def execute(self):
        output_dir = self.config.get("output_dir", "results")
        os.makedirs(output_dir, exist_ok=True)
        report = cmd_validate(kappa_scale=self.config.get("kappa_scale", 1.0), full=not self.config.get("quick", False),
                              grid=self.config.get("grid"), out=os.path.join(output_dir, self.config.get("file_name", "validation.csv")),
                              workers=self.config.get("workers", 1))
        if not report.passed:
            raise ValidationFailed(f"{len(report.failures)} validation check(s) failed: {list(report.failures['claim'])}")
        return report
