from pathlib import Path
from typing import List

from config import ExperimentConfig
from dyadic import storage
from dyadic.seeding import derive_seed
from operators import build_operator, save_operator
from processors.ensemble_processor import RANDOM
from processors.experiment_processor import ExperimentProcessor
from sources import get_source

EMIT_KINDS = ('operators', 'mu', 'lambda', 'symbol', 'function')


class GenProcessor(ExperimentProcessor):
    """
    Writes operator JSON files and DYDL grid functions for every ensemble seed.

    Artifacts land in ``<output dir>/<name>/``; the report lists one row per written file.
    """

    def __init__(self, config: ExperimentConfig, **kwargs):
        super().__init__(config, **kwargs)
        self.emit = list(config.emit or EMIT_KINDS)
        unknown = [kind for kind in self.emit if kind not in EMIT_KINDS]
        if unknown:
            raise ValueError(f'Unsupported emit kinds: {unknown}')
        self.folder = self.output.parent / config.name
        self.statistic = None
        self.sort_columns = ['seed', 'kind', 'path']
        self.fixture_mode = 'off'

    def _run(self) -> List[dict]:
        rows = []
        for seed in self.config.instance_seeds():
            for kind in self.emit:
                rows.extend(getattr(self, f'emit_{kind}')(seed))
        self.console.log(f'{self.config.name}: {len(rows)} files written to {self.folder}')
        return rows

    def emit_operators(self, seed: int) -> List[dict]:
        rows = []
        for position, template in enumerate(self.config.operators):
            operator = build_operator(template, self.config.grid, derive_seed(seed, 'operator', position))
            name = template.get('name', f'operator{position}')
            path = save_operator(operator, self.folder / f'{name}_{seed}.json')
            rows.append({'seed': seed, 'kind': operator.kind, 'path': str(path)})
        return rows

    def emit_function(self, seed: int, role: str = 'function') -> List[dict]:
        if role in ('mu', 'lambda'):
            descriptor = self.config.weights.get(role) or {'source': 'constant', 'value': 1.0}
        else:
            descriptor = getattr(self.config, role) or RANDOM
        source = get_source(descriptor, name=role, experiment=self.config.name,
                            root_output_dir=str(self.output.parent))
        path = storage.save(source.load(self.config.grid, seed), source.generate_fullpath_name('dydl', seed))
        return [{'seed': seed, 'kind': role, 'path': str(Path(path))}]

    def emit_mu(self, seed: int) -> List[dict]:
        return self.emit_function(seed, 'mu')

    def emit_lambda(self, seed: int) -> List[dict]:
        return self.emit_function(seed, 'lambda')

    def emit_symbol(self, seed: int) -> List[dict]:
        return self.emit_function(seed, 'symbol')
