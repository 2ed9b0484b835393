import logging
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class BaseTask(ABC):
    def __init__(self, name: str, config: Dict[str, Any]):
        self.name = name
        self.config = config
        self.last_run: Optional[float] = None
        self.result: Any = None

    @abstractmethod
    def execute(self):
        pass

    def run(self) -> bool:
        start = time.perf_counter()
        try:
            self.result = self.execute()
        except Exception as e:
            logger.exception(f"Error executing task {self.name}: {e}")
            return False
        finally:
            self.last_run = time.perf_counter() - start
        logger.info(f"Task {self.name} finished in {self.last_run:.2f} s")
        return True


class TaskOrchestrator:
    def __init__(self):
        self.tasks: List[BaseTask] = []

    def add_task(self, task: BaseTask):
        self.tasks.append(task)

    def run(self) -> Dict[str, bool]:
        return {task.name: task.run() for task in self.tasks}
