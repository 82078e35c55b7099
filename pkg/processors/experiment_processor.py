import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from os import getenv
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import yaml
from pendulum import now
from rich.console import Console

from config import ExperimentConfig
from dyadic import __version__
from dyadic.errors import IdentityError
from dyadic.grid import GridFunction
from dyadic.weights import Weight
from sources import get_source

FIXTURE_TOLERANCE = 1e-9


class ExperimentProcessor(ABC):
    def __init__(self, config: ExperimentConfig, **kwargs):
        """
        Initializes the ExperimentProcessor object.

        - df: The report rows. Must be set by the child class through ``_run``.
        - summary: Statistics of the statistic column, filled by ``summarise``.

        kwargs: Arbitrary keyword arguments overriding the configuration. Possible key-value pairs are:
            - 'out': Output CSV path.
            - 'seed': Base seed.
            - 'fixture': Fixture mode, check | regenerate | off.
            - 'threads': Worker threads for ensemble instances.
            - 'fixture_dir': Directory holding frozen summaries.
            - 'log_dir': Directory for replay artifacts.

        :param config: The validated experiment configuration.
        """
        self.config = config
        self.kwargs = kwargs
        if kwargs.get('seed') is not None:
            self.config.seed = int(kwargs['seed'])
            self.config.raw['seed'] = self.config.seed
        self.df: Optional[pd.DataFrame] = None
        self.summary: Optional[Dict] = None
        self.output = Path(kwargs.get('out') or config.output_path())
        self.fixture_mode = kwargs.get('fixture') or config.fixture
        self.threads = int(kwargs.get('threads') or config.threads or getenv('DYADIC_THREADS', 0) or os.cpu_count() or 1)
        self.fixture_dir = Path(kwargs.get('fixture_dir', getenv('DYADIC_FIXTURE_DIR', './fixtures')))
        self.log_dir = Path(kwargs.get('log_dir', getenv('DYADIC_LOG_DIR', './logs')))
        self.statistic = 'ratio'
        self.sort_columns: List[str] = ['seed']
        self.console = Console()

    def run(self):
        """
        Computes the report rows.

        - Executes the experiment through ``_run``.
        - Sorts the rows so that thread scheduling never changes the output bytes.
        - Computes the summary statistics.
        """
        rows = self._run()
        self.df = pd.DataFrame(rows)
        sort_columns = [column for column in self.sort_columns if column in self.df.columns]
        if sort_columns and not self.df.empty:
            self.df = self.df.sort_values(sort_columns, kind='mergesort').reset_index(drop=True)
        self.summarise()

    @abstractmethod
    def _run(self) -> List[dict]:
        """
        Abstract method computing the report rows.

        Must be implemented by child classes.
        """
        pass

    def map_instances(self, fn: Callable[[int], Union[dict, List[dict]]], seeds: Sequence[int]) -> List[dict]:
        """Runs ``fn`` for every seed on the thread pool and flattens the returned rows."""
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            results = list(executor.map(fn, seeds))
        rows = []
        for result in results:
            rows.extend(result if isinstance(result, list) else [result])
        return rows

    def load_function(self, descriptor: Optional[dict], role: str, seed: int, default: dict) -> GridFunction:
        source = get_source(descriptor or default, name=role, experiment=self.config.name)
        return source.load(self.config.grid, seed)

    def load_weight(self, role: str, seed: int) -> Weight:
        descriptor = self.config.weights.get(role)
        return Weight(self.load_function(descriptor, role, seed, {'source': 'constant', 'value': 1.0}))

    def source_label(self, descriptor: Optional[dict], role: str, default: dict) -> str:
        return get_source(descriptor or default, name=role, experiment=self.config.name).label

    def summarise(self) -> Dict:
        """Count, max, median and upper quantiles of the statistic column plus the flagged count."""
        summary = {'count': 0 if self.df is None else int(len(self.df))}
        if self.df is not None and self.statistic in self.df.columns and not self.df.empty:
            values = self.df[self.statistic].to_numpy(dtype=np.float64)
            finite = values[np.isfinite(values)]
            flagged = int(np.sum(~np.isfinite(values)))
            if 'flagged' in self.df.columns:
                flagged = max(flagged, int(self.df['flagged'].sum()))
            summary['flagged'] = flagged
            if finite.size:
                summary['max'] = float(finite.max())
                summary['median'] = float(np.median(finite))
                summary['q90'] = float(np.quantile(finite, 0.9))
                summary['q99'] = float(np.quantile(finite, 0.99))
        self.summary = summary
        return summary

    def write_csv(self) -> Path:
        """
        Writes the report rows with '\\n' line endings and 17 significant digits.
        """
        if self.df is None:
            raise ValueError('run must be called before write_csv')
        self.output.parent.mkdir(parents=True, exist_ok=True)
        self.df.to_csv(self.output, index=False, lineterminator='\n', float_format='%.17g')
        return self.output

    def summary_path(self) -> Path:
        return self.output.with_name(self.output.name + '.summary.yaml')

    def write_summary(self) -> Path:
        """Writes the summary side-car, the only place carrying the environment stamp."""
        document = {
            'name': self.config.name,
            'experiment': self.config.experiment,
            'statistic': self.statistic,
            'summary': self.summary,
            'environment': {
                'version': __version__,
                'levels': list(self.config.grid.levels) if self.config.grid else None,
                'generated_at': now().to_iso8601_string(),
            },
        }
        path = self.summary_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as file:
            yaml.safe_dump(document, file, sort_keys=False)
        return path

    def fixture_path(self) -> Path:
        return self.fixture_dir / f'{self.config.name}.yaml'

    def check_fixture(self) -> str:
        """
        Compares the summary against the frozen fixture; only 'regenerate' writes one.

        :return: 'skipped', 'written', 'regenerated' or 'matched'.
        :raises IdentityError: If the fixture is missing in check mode or any stored statistic drifted
            by more than 1e-9.
        """
        if self.fixture_mode == 'off' or self.summary is None:
            return 'skipped'
        path = self.fixture_path()
        if self.fixture_mode == 'regenerate':
            existed = path.exists()
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as file:
                yaml.safe_dump({'name': self.config.name, 'summary': self.summary}, file, sort_keys=False)
            return 'regenerated' if existed else 'written'
        if not path.exists():
            raise IdentityError(f'missing fixture {path}: run with --fixture regenerate to freeze it', str(path))

        with open(path, 'r', encoding='utf-8') as file:
            frozen = (yaml.safe_load(file) or {}).get('summary', {})
        drifted = [f'{key}: not frozen' for key in self.summary if key not in frozen]
        for key, expected in frozen.items():
            actual = self.summary.get(key)
            if actual is None or abs(float(actual) - float(expected)) > FIXTURE_TOLERANCE * max(1.0, abs(float(expected))):
                drifted.append(f'{key}: expected {expected!r}, got {actual!r}')
        if drifted:
            raise IdentityError(f'fixture drift in {path}: ' + '; '.join(drifted), str(path))
        return 'matched'

    def check_records(self):
        """Hook run after the report is written and before the fixture step."""
        pass

    def handle_outputs(self):
        """Writes the CSV and the summary side-car, then applies the fixture mode."""
        self.console.log(f'{self.config.name}: Writing {self.output}')
        self.write_csv()
        self.write_summary()
        self.check_records()
        status = self.check_fixture()
        if status in ('written', 'regenerated'):
            self.console.log(f'{self.config.name}: Fixture written to {self.fixture_path()}', style='yellow')
        elif status == 'matched':
            self.console.log(f'{self.config.name}: Fixture matched', style='green')
        return status
