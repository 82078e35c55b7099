"""
Experiment configuration schema.

Configs are YAML mappings (JSON loads unchanged). Unknown keys anywhere are rejected with the
dotted path of the offending field.
"""
import re
from copy import deepcopy
from dataclasses import dataclass, field
from os import getenv
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from dyadic.grid import MultiGrid
from operators import TEMPLATE_FIELDS
from sources import SOURCE_CLASSES

SCHEMA_VERSION = 1

EXPERIMENTS = ('verify', 'norms', 'commutator', 'paraproduct', 'square_function', 'fefferman_stein',
               'embedding', 'search', 'gen')
FIXTURE_MODES = ('check', 'regenerate', 'off')
TEST_FAMILIES = ('rectangles', 'rectangles_plus_unions')
FUNCTIONAL_KINDS = ('lp', 'ap', 'ainf', 'slice_ap', 'product_bmo', 'little_bmo', 'bmo_v', 'little_product_bmo')
FUNCTIONAL_FIELDS = {'kind', 'input', 'weight', 'axes', 'p', 'family', 'axis'}
INPUT_NAMES = ('symbol', 'function', 'mu', 'lambda', 'nu')
WEIGHT_ROLES = ('mu', 'lambda')
OPERATOR_TYPES = ('shift', 'partial', 'full')
FULL_FLAVORS = ('none', 'full', 'partial_1', 'partial_2')

TOP_LEVEL_FIELDS = {
    'version', 'name', 'experiment', 'grid', 'p', 'seed', 'ensemble', 'threads', 'weights', 'symbol',
    'function', 'operators', 'partition', 'functionals', 'axes', 'bmo_axes', 'family_size', 'q', 'budget',
    'suites', 'grids', 'telescoping_cap', 'emit', 'fixture', 'output', 'test_family',
}


class ConfigError(ValueError):
    """Raised for malformed experiment configurations; ``field`` holds the dotted path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f'{field_path}: {message}')
        self.field = field_path


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f'expected a mapping, got {type(value).__name__}')
    return value


def _reject_unknown(mapping: dict, allowed, path: str):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f'{path}.{key}' if path else str(key), 'unknown field')


def _axes(value, path: str, m: int) -> List[int]:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, 'expected a nonempty list of axes')
    for position, axis in enumerate(value):
        if not isinstance(axis, int) or not 0 <= axis < m:
            raise ConfigError(f'{path}[{position}]', f'axis must be an integer in 0..{m - 1}')
    if len(set(value)) != len(value):
        raise ConfigError(path, 'repeated axis')
    return list(value)


def _source(descriptor, path: str) -> dict:
    descriptor = _require_mapping(descriptor, path)
    name = descriptor.get('source')
    if name not in SOURCE_CLASSES:
        raise ConfigError(f'{path}.source', f'expected one of {sorted(SOURCE_CLASSES)}')
    _reject_unknown(descriptor, SOURCE_CLASSES[name].ACCEPTED | {'source'}, path)
    return dict(descriptor)


def _operator(template, path: str, m: int, levels) -> dict:
    template = _require_mapping(template, path)
    _reject_unknown(template, TEMPLATE_FIELDS, path)
    if 'path' in template:
        return dict(template)
    kind = template.get('type')
    if kind not in OPERATOR_TYPES:
        raise ConfigError(f'{path}.type', f'expected one of {list(OPERATOR_TYPES)}')
    axes = _axes(template.get('axes'), f'{path}.axes', m)
    theta = template.get('theta', 1.0)
    if not isinstance(theta, (int, float)) or not 0 <= theta <= 1:
        raise ConfigError(f'{path}.theta', 'theta must lie in [0, 1]')
    if kind in ('partial', 'full') and len(axes) != 2:
        raise ConfigError(f'{path}.axes', f'a {kind} paraproduct needs exactly two axes')
    if kind == 'shift':
        complexity = template.get('complexity', [[0, 0]] * len(axes))
        if not isinstance(complexity, list) or len(complexity) != len(axes):
            raise ConfigError(f'{path}.complexity', 'expected one [k, l] pair per axis')
        for axis, pair in zip(axes, complexity):
            if not isinstance(pair, list) or len(pair) != 2 or max(pair) >= levels[axis] or min(pair) < 0:
                raise ConfigError(f'{path}.complexity', f'pair {pair} does not fit axis {axis}')
    if kind == 'partial':
        complexity = template.get('complexity', [0, 0])
        if (not isinstance(complexity, list) or len(complexity) != 2
                or not all(isinstance(k, int) and 0 <= k < levels[axes[0]] for k in complexity)):
            raise ConfigError(f'{path}.complexity', 'expected [k, l] fitting the shift axis')
    if kind == 'full' and template.get('flavor', 'none') not in FULL_FLAVORS:
        raise ConfigError(f'{path}.flavor', f'expected one of {list(FULL_FLAVORS)}')
    if 'flavor' in template and kind != 'full':
        raise ConfigError(f'{path}.flavor', 'only full paraproducts take a flavor')
    if 'adjoint' in template and kind != 'partial':
        raise ConfigError(f'{path}.adjoint', 'only partial paraproducts take an adjoint flag')
    return dict(template)


@dataclass
class ExperimentConfig:
    """
    Validated experiment configuration.

    ``raw`` keeps the document as loaded, so ``to_dict`` round-trips it.
    """
    name: str
    experiment: str
    grid: Optional[MultiGrid]
    p: float = 2.0
    seed: int = 0
    ensemble: int = 1
    threads: Optional[int] = None
    weights: Dict[str, dict] = field(default_factory=dict)
    symbol: Optional[dict] = None
    function: Optional[dict] = None
    operators: List[dict] = field(default_factory=list)
    partition: Optional[List[List[int]]] = None
    functionals: List[dict] = field(default_factory=list)
    axes: Optional[List[int]] = None
    bmo_axes: Optional[List[int]] = None
    family_size: int = 4
    q: float = 2.0
    budget: int = 20
    suites: Optional[List[str]] = None
    grids: Optional[List[List[int]]] = None
    telescoping_cap: int = 4096
    emit: List[str] = field(default_factory=list)
    fixture: str = 'check'
    output: Optional[str] = None
    test_family: str = 'rectangles'
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, document: dict, default_name: str = 'experiment') -> 'ExperimentConfig':
        document = _require_mapping(document, 'config')
        _reject_unknown(document, TOP_LEVEL_FIELDS, '')
        if document.get('version') != SCHEMA_VERSION:
            raise ConfigError('version', f'expected schema version {SCHEMA_VERSION}')
        experiment = document.get('experiment')
        if experiment not in EXPERIMENTS:
            raise ConfigError('experiment', f'expected one of {list(EXPERIMENTS)}')

        grid = None
        if 'grid' in document:
            grid_doc = _require_mapping(document['grid'], 'grid')
            _reject_unknown(grid_doc, {'levels'}, 'grid')
            try:
                grid = MultiGrid(tuple(grid_doc.get('levels', [])))
            except (TypeError, ValueError) as e:
                raise ConfigError('grid.levels', str(e))
        elif experiment != 'verify':
            raise ConfigError('grid', 'grid must be provided')
        m = grid.m if grid else 0

        p = document.get('p', 2.0)
        if not isinstance(p, (int, float)) or p <= 1:
            raise ConfigError('p', 'p must be a number greater than 1')
        seed = document.get('seed', 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError('seed', 'seed must be a non-negative integer')
        ensemble = document.get('ensemble', 1)
        if not isinstance(ensemble, int) or ensemble < 1:
            raise ConfigError('ensemble', 'ensemble size must be at least 1')
        threads = document.get('threads')
        if threads is not None and (not isinstance(threads, int) or threads < 1):
            raise ConfigError('threads', 'threads must be a positive integer')

        weights = {}
        if 'weights' in document:
            weights_doc = _require_mapping(document['weights'], 'weights')
            _reject_unknown(weights_doc, WEIGHT_ROLES, 'weights')
            weights = {role: _source(descriptor, f'weights.{role}') for role, descriptor in weights_doc.items()}
        symbol = _source(document['symbol'], 'symbol') if 'symbol' in document else None
        function = _source(document['function'], 'function') if 'function' in document else None

        operators = []
        for position, template in enumerate(document.get('operators', []) or []):
            operators.append(_operator(template, f'operators[{position}]', m, grid.levels if grid else ()))
        if experiment in ('commutator', 'search'):
            if not operators:
                raise ConfigError('operators', f'a {experiment} experiment needs at least one operator')
            if not any('path' in template for template in operators):
                covered = sorted(axis for template in operators for axis in template['axes'])
                if covered != list(range(m)):
                    raise ConfigError('operators', f'operator axes must cover every axis 0..{m - 1} exactly once')

        partition = document.get('partition')
        if partition is not None:
            if not isinstance(partition, list):
                raise ConfigError('partition', 'expected a list of axis blocks')
            partition = [_axes(block, f'partition[{n}]', m) for n, block in enumerate(partition)]
            flat = sorted(axis for block in partition for axis in block)
            if flat != list(range(m)):
                raise ConfigError('partition', f'blocks must cover every axis 0..{m - 1} exactly once')

        functionals = []
        for position, functional in enumerate(document.get('functionals', []) or []):
            path = f'functionals[{position}]'
            functional = _require_mapping(functional, path)
            _reject_unknown(functional, FUNCTIONAL_FIELDS, path)
            if functional.get('kind') not in FUNCTIONAL_KINDS:
                raise ConfigError(f'{path}.kind', f'expected one of {list(FUNCTIONAL_KINDS)}')
            if functional.get('input', 'symbol') not in INPUT_NAMES:
                raise ConfigError(f'{path}.input', f'expected one of {list(INPUT_NAMES)}')
            if functional.get('weight') is not None and functional['weight'] not in INPUT_NAMES:
                raise ConfigError(f'{path}.weight', f'expected one of {list(INPUT_NAMES)}')
            if 'axes' in functional:
                _axes(functional['axes'], f'{path}.axes', m)
            if 'axis' in functional and not (isinstance(functional['axis'], int) and 0 <= functional['axis'] < m):
                raise ConfigError(f'{path}.axis', f'axis must be an integer in 0..{m - 1}')
            if functional.get('family', 'rectangles') not in TEST_FAMILIES:
                raise ConfigError(f'{path}.family', f'expected one of {list(TEST_FAMILIES)}')
            functionals.append(dict(functional))

        axes = _axes(document['axes'], 'axes', m) if 'axes' in document else None
        bmo_axes = _axes(document['bmo_axes'], 'bmo_axes', m) if 'bmo_axes' in document else None

        fixture = document.get('fixture', 'check')
        if fixture not in FIXTURE_MODES:
            raise ConfigError('fixture', f'expected one of {list(FIXTURE_MODES)}')
        test_family = document.get('test_family', 'rectangles')
        if test_family not in TEST_FAMILIES:
            raise ConfigError('test_family', f'expected one of {list(TEST_FAMILIES)}')

        for key in ('family_size', 'budget', 'telescoping_cap'):
            if key in document and (not isinstance(document[key], int) or document[key] < 1):
                raise ConfigError(key, f'{key} must be a positive integer')

        grids = document.get('grids')
        if grids is not None:
            if not isinstance(grids, list):
                raise ConfigError('grids', 'expected a list of level lists')
            for position, levels in enumerate(grids):
                try:
                    MultiGrid(tuple(levels))
                except (TypeError, ValueError) as e:
                    raise ConfigError(f'grids[{position}]', str(e))

        return cls(
            name=str(document.get('name', default_name)),
            experiment=experiment,
            grid=grid,
            p=float(p),
            seed=seed,
            ensemble=ensemble,
            threads=threads,
            weights=weights,
            symbol=symbol,
            function=function,
            operators=operators,
            partition=partition,
            functionals=functionals,
            axes=axes,
            bmo_axes=bmo_axes,
            family_size=document.get('family_size', 4),
            q=float(document.get('q', 2.0)),
            budget=document.get('budget', 20),
            suites=document.get('suites'),
            grids=grids,
            telescoping_cap=document.get('telescoping_cap', 4096),
            emit=list(document.get('emit', []) or []),
            fixture=fixture,
            output=document.get('output'),
            test_family=test_family,
            raw=deepcopy(document),
        )

    @classmethod
    def load(cls, path) -> 'ExperimentConfig':
        path = Path(path)
        with open(path, 'r', encoding='utf-8') as file:
            try:
                document = yaml.safe_load(file)
            except yaml.YAMLError as e:
                raise ConfigError('config', f'{path.name} is not valid YAML: {e}')
        return cls.from_dict(document, default_name=re.sub(r"^(\[[^\]]*\])+", "", path.stem))

    def to_dict(self) -> dict:
        return deepcopy(self.raw)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def output_path(self) -> Path:
        if self.output:
            return Path(self.output)
        return Path(getenv('DYADIC_OUTPUT_DIR', './output')) / f'{self.name}.csv'

    def instance_seeds(self) -> List[int]:
        return [self.seed + i for i in range(self.ensemble)]
