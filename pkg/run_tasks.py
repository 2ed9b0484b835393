import argparse
import sys

from core.task_runner import TaskRunner


def parse_args():
    parser = argparse.ArgumentParser(description='Run tasks from configuration')
    parser.add_argument('--config',
                        default='config/tasks.yml',
                        help='Path to tasks configuration file')
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    runner = TaskRunner(config_path=args.config)
    outcome = runner.run()
    return 0 if all(outcome.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
