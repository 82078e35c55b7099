import re
import timeit
from os import getenv
from pathlib import Path
from typing import List

from rich.console import Console

from config import ConfigError, ExperimentConfig
from dyadic.errors import IdentityError
from processors import get_processor

EXIT_PASS = 0
EXIT_IDENTITY = 1
EXIT_CONFIG = 2

NORMAL_PRIORITY = 3
PRIORITY_TAGS = {'[PP]': 0, '[P]': 1, '[H]': 2, '[L]': 4}
DISABLED_TAG = '[D]'
CONFIG_PATTERNS = ('*.yaml', '*.yml')


class Pipeline:
    """
    Runs every experiment config of a directory.

    File-name tags order the run: [PP] permanent priority, [P] one-shot priority, [H] high,
    untagged, [L] low; [D] files are skipped. When any [PP] or [P] file exists only those run.

    :param config_dir: The directory containing the YAML experiment configs.
    :param kwargs: Overrides handed to every processor (out is ignored for directory runs).
    """

    def __init__(self, config_dir, **kwargs):
        self.config_dir = Path(config_dir)
        self.kwargs = {key: value for key, value in kwargs.items() if key != 'out'}
        self.log_folder = Path(getenv('DYADIC_LOG_DIR', './logs'))
        self.console = Console()

    def run(self) -> int:
        """
        Runs every selected config and logs the totals.

        :return: 2 if any config was malformed, else 1 if any identity or fixture check failed or
            an experiment crashed, else 0.
        """
        self.log_folder.mkdir(parents=True, exist_ok=True)
        self.console.log('[bold green]Collecting experiment configs...')
        config_files = self.load_config_files()

        started = timeit.default_timer()
        statuses = {path.name: self.run_config(path) for path in config_files}
        self.strip_one_shot_tags(config_files)

        failed = [self.remove_tags(name) for name, status in statuses.items() if status != EXIT_PASS]
        self.console.log(f'[bold green]Total time: {timeit.default_timer() - started:.2f} seconds', style='green')
        self.console.log(f'[bold green]Experiments run: {len(config_files) - len(failed)}/{len(config_files)}',
                         style='green')
        if failed:
            self.console.log(f'[bold red]Experiments with errors: {failed}', style='red')
        return max(statuses.values(), default=EXIT_PASS)

    def run_config(self, path: Path) -> int:
        """Loads and runs one config; failures are logged and turned into an exit status."""
        name = Path(self.remove_tags(path.name)).stem
        started = timeit.default_timer()
        try:
            config = ExperimentConfig.load(path)
            self.run_experiment(config)
        except ConfigError as e:
            self.console.log(f'Invalid config {path.name}: {e}', style='red')
            return EXIT_CONFIG
        except Exception as e:
            self.console.log(f'Error processing {name}: {e}', style='red')
            if isinstance(e, IdentityError) and e.artifact:
                self.console.log(f'Replay artifact: {e.artifact}', style='red')
            self.log_exception_to_file(self.log_folder / f'traceback_{name}.txt')
            return EXIT_IDENTITY
        self.console.log(f'[bold green]{config.name}: Processed in {timeit.default_timer() - started:.2f} seconds',
                         style='green')
        return EXIT_PASS

    def run_experiment(self, config: ExperimentConfig):
        processor = get_processor(config, **self.kwargs)
        self.console.log(f'{config.name}: Running {config.experiment}')
        processor.run()
        processor.handle_outputs()
        return processor

    @staticmethod
    def log_exception_to_file(log_file: Path):
        """Writes the traceback of the exception being handled, locals included."""
        with open(log_file, 'w', encoding='utf-8') as file:
            Console(file=file).print_exception(show_locals=True)

    @staticmethod
    def get_priority(filename) -> int:
        """Sort key of a config file: 0 for [PP], 1 for [P], 2 for [H], 3 untagged, 4 for [L]."""
        name = Path(filename).name.upper()
        for tag, priority in PRIORITY_TAGS.items():
            if name.startswith(tag):
                return priority
        return NORMAL_PRIORITY

    def load_config_files(self) -> List[Path]:
        """Enabled config files in run order; the priority files alone when there are any."""
        found = sorted(path for pattern in CONFIG_PATTERNS for path in self.config_dir.glob(pattern))
        enabled = sorted((path for path in found if not path.name.upper().startswith(DISABLED_TAG)),
                         key=self.get_priority)
        urgent = [path for path in enabled if self.get_priority(path) <= PRIORITY_TAGS['[P]']]
        return urgent or enabled

    @staticmethod
    def remove_tags(file_name: str) -> str:
        return re.sub(r'^(\[[^\]]*\])+', '', file_name)

    @staticmethod
    def strip_one_shot_tags(config_files: List[Path]):
        """Renames '[P]name.yaml' to 'name.yaml' once it has run; [PP] files keep their tag."""
        for path in config_files:
            if '[PP]' in path.name.upper():
                continue
            renamed = re.sub(r'\[P]', '', path.name, flags=re.IGNORECASE)
            if renamed != path.name:
                path.rename(path.with_name(renamed))
