from typing import Dict, List, Optional

from config import ExperimentConfig
from dyadic.bmo import (Partition, bmo_v_norm, little_bmo_norm, little_product_bmo_norm, product_bmo_norm)
from dyadic.grid import GridFunction, lp_norm
from dyadic.weights import Weight, ainf_constant, ap_constant, bloom_weight, slice_ap_constant
from processors.experiment_processor import ExperimentProcessor

DEFAULT_SOURCES = {
    'symbol': {'source': 'random'},
    'function': {'source': 'random'},
    'mu': {'source': 'constant', 'value': 1.0},
    'lambda': {'source': 'constant', 'value': 1.0},
}
DEFAULT_WEIGHT = {
    'lp': None,
    'product_bmo': None,
    'little_bmo': None,
    'bmo_v': None,
    'little_product_bmo': 'nu',
}
COLUMNS = ['kind', 'axes', 'p', 'value', 'seed', 'source']


class NormsProcessor(ExperimentProcessor):
    """
    Evaluates the configured functionals on the configured inputs.

    One row per functional and ensemble seed, columns ``kind,axes,p,value,seed,source``.
    """

    def __init__(self, config: ExperimentConfig, **kwargs):
        super().__init__(config, **kwargs)
        self.statistic = 'value'
        self.sort_columns = ['seed']
        self.partition = Partition(tuple(tuple(block) for block in config.partition), config.grid.m) \
            if config.partition else Partition.singletons(config.grid.m)

    def descriptor(self, name: str) -> dict:
        if name in ('mu', 'lambda'):
            return self.config.weights.get(name) or DEFAULT_SOURCES[name]
        return getattr(self.config, name) or DEFAULT_SOURCES[name]

    def inputs(self, seed: int) -> Dict[str, GridFunction]:
        loaded = {name: self.load_function(self.descriptor(name), name, seed, DEFAULT_SOURCES[name])
                  for name in DEFAULT_SOURCES}
        loaded['nu'] = bloom_weight(Weight(loaded['mu']), Weight(loaded['lambda']), self.config.p).values
        return loaded

    def label(self, name: str) -> str:
        if name == 'nu':
            return 'bloom(' + ','.join(self.source_label(self.descriptor(role), role, DEFAULT_SOURCES[role])
                                       for role in ('mu', 'lambda')) + ')'
        return self.source_label(self.descriptor(name), name, DEFAULT_SOURCES[name])

    def _run(self) -> List[dict]:
        rows = []
        for seed in self.config.instance_seeds():
            inputs = self.inputs(seed)
            for functional in self.config.functionals:
                rows.append(self.evaluate(functional, inputs, seed))
        return rows

    def evaluate(self, functional: dict, inputs: Dict[str, GridFunction], seed: int) -> dict:
        """
        Dispatches ``functional['kind']`` to the matching ``functional_<kind>`` method.

        :return: The report row.
        """
        kind = functional['kind']
        name = functional.get('input', 'symbol')
        weight_name = functional.get('weight', DEFAULT_WEIGHT.get(kind))
        target = inputs[name]
        weight = inputs[weight_name] if weight_name else None
        method = getattr(self, f'functional_{kind}')
        value, axes, p = method(functional, target, weight)
        return {
            'kind': kind,
            'axes': ' '.join(map(str, axes)),
            'p': '' if p is None else p,
            'value': float(value),
            'seed': seed,
            'source': self.label(name) + (f'|{weight_name}' if weight_name else ''),
        }

    def all_axes(self, functional: dict) -> List[int]:
        return list(functional.get('axes', range(self.config.grid.m)))

    def functional_lp(self, functional: dict, f: GridFunction, weight: Optional[GridFunction]):
        p = float(functional.get('p', self.config.p))
        return lp_norm(f, p, weight), self.all_axes(functional), p

    def functional_ap(self, functional: dict, w: GridFunction, weight: Optional[GridFunction]):
        p = float(functional.get('p', self.config.p))
        return ap_constant(Weight(w), p), self.all_axes(functional), p

    def functional_slice_ap(self, functional: dict, w: GridFunction, weight: Optional[GridFunction]):
        p = float(functional.get('p', self.config.p))
        axis = functional.get('axis', 0)
        return slice_ap_constant(Weight(w), p, axis), [axis], p

    def functional_ainf(self, functional: dict, w: GridFunction, weight: Optional[GridFunction]):
        axis = functional.get('axis', 0)
        return ainf_constant(Weight(w), axis), [axis], None

    def functional_product_bmo(self, functional: dict, b: GridFunction, weight: Optional[GridFunction]):
        axes = self.all_axes(functional)
        family = functional.get('family', self.config.test_family)
        return product_bmo_norm(b, weight, axes, family), axes, None

    def functional_bmo_v(self, functional: dict, b: GridFunction, weight: Optional[GridFunction]):
        axes = self.all_axes(functional)
        return bmo_v_norm(b, weight, axes), axes, None

    def functional_little_bmo(self, functional: dict, b: GridFunction, weight: Optional[GridFunction]):
        return little_bmo_norm(b, weight), list(range(self.config.grid.m)), None

    def functional_little_product_bmo(self, functional: dict, b: GridFunction, weight: Optional[GridFunction]):
        blocks = ';'.join(','.join(map(str, block)) for block in self.partition.blocks)
        return little_product_bmo_norm(b, weight, self.partition), [blocks], None

    def write_csv(self):
        if self.df is not None and self.df.empty:
            self.df = self.df.reindex(columns=COLUMNS)
        return super().write_csv()
