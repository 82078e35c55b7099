from typing import List, Tuple

import numpy as np

from config import ExperimentConfig
from dyadic.bmo import Partition, dual_pairing_ratio, product_bmo_norm
from dyadic.commutator import CommutatorSpec, bloom_ratio
from dyadic.errors import IdentityError
from dyadic.grid import GridFunction, lp_norm
from dyadic.maximal import fefferman_stein_ratio, square_function_ratio
from dyadic.paraproducts import product_expansion
from dyadic.seeding import derive_seed
from dyadic.weights import Weight, ap_constant, bloom_weight
from operators import build_operator
from processors.experiment_processor import ExperimentProcessor

ENSEMBLE_EXPERIMENTS = ('commutator', 'paraproduct', 'square_function', 'fefferman_stein', 'embedding')
RANDOM = {'source': 'random'}
MEAN_ZERO = {'source': 'random', 'mean_zero': True}
# a finite ratio above factor x the median of its label is a blow-up
BLOWUP_FACTORS = {'embedding': 100.0}


class EnsembleProcessor(ExperimentProcessor):
    """
    Seeded ensembles of empirical inequality ratios.

    Instance i uses seed ``seed + i``; instances run on a thread pool and the rows are sorted by
    seed (then label) afterwards. The experiment name selects the ``instance_<experiment>`` method.
    """

    experiments = ENSEMBLE_EXPERIMENTS

    def __init__(self, config: ExperimentConfig, **kwargs):
        super().__init__(config, **kwargs)
        if config.experiment not in self.experiments:
            raise ValueError(f'Unsupported ensemble experiment: {config.experiment}')
        self.sort_columns = ['seed', 'label']
        self.partition = Partition(tuple(tuple(block) for block in config.partition), config.grid.m) \
            if config.partition else None

    def _run(self) -> List[dict]:
        instance = getattr(self, f'instance_{self.config.experiment}')
        self.console.log(f'{self.config.name}: {self.config.ensemble} {self.config.experiment} instances '
                         f'on {self.threads} threads')
        return self.map_instances(instance, self.config.instance_seeds())

    def run(self):
        super().run()
        self.flag_blowups()
        self.summarise()

    def flag_blowups(self):
        """
        Marks non-finite ratios and, for experiments with a blow-up factor, ratios exceeding that
        factor times the median finite ratio of their label.
        """
        if self.df is None or self.df.empty:
            return
        ratio = self.df['ratio'].astype(float)
        finite = np.isfinite(ratio)
        flagged = self.df['flagged'].astype(bool) | ~finite
        factor = BLOWUP_FACTORS.get(self.config.experiment)
        if factor is not None:
            median = ratio.where(finite).groupby(self.df['label']).transform('median')
            flagged = flagged | ((median > 0) & (ratio > factor * median))
        self.df['flagged'] = flagged

    def check_records(self):
        """Every ensemble record must be finite and unflagged."""
        flagged = (self.summary or {}).get('flagged', 0)
        if flagged:
            seeds = self.df.loc[self.df['flagged'], 'seed'].tolist()
            raise IdentityError(f'{self.config.name}: {flagged} flagged records (seeds {seeds})', str(self.output))

    def weights(self, seed: int) -> Tuple[Weight, Weight]:
        return self.load_weight('mu', seed), self.load_weight('lambda', seed)

    def symbol(self, seed: int) -> GridFunction:
        return self.load_function(self.config.symbol, 'symbol', seed, RANDOM)

    def function(self, seed: int, default: dict = RANDOM) -> GridFunction:
        return self.load_function(self.config.function, 'function', seed, default)

    def axes(self) -> List[int]:
        return list(self.config.axes) if self.config.axes else list(range(self.config.grid.m))

    def commutator_spec(self, seed: int, symbol: GridFunction) -> CommutatorSpec:
        operators = [build_operator(template, self.config.grid, derive_seed(seed, 'operator', position))
                     for position, template in enumerate(self.config.operators)]
        return CommutatorSpec(operators, symbol, self.partition)

    @staticmethod
    def operator_label(spec: CommutatorSpec) -> str:
        return '+'.join(f"{operator.kind}[{','.join(map(str, operator.axes))}]" for operator in spec.operators)

    def instance_commutator(self, seed: int) -> dict:
        """Bloom ratio of the iterated commutator for one seeded (mu, lambda, b, f, operators)."""
        mu, lam = self.weights(seed)
        spec = self.commutator_spec(seed, self.symbol(seed))
        record = bloom_ratio(spec, mu, lam, self.config.p, self.function(seed))
        return {'seed': seed, 'label': self.operator_label(spec), **record.to_dict()}

    def instance_paraproduct(self, seed: int) -> List[dict]:
        """
        ||A(b, f)||_{L^p(lambda)} / (||b||_{BMO^v(nu)} ||f||_{L^p(mu)}) for every legal composed
        paraproduct A over the axes v.
        """
        mu, lam = self.weights(seed)
        nu = bloom_weight(mu, lam, self.config.p)
        b, f = self.symbol(seed), self.function(seed)
        v = self.axes()
        bmo = product_bmo_norm(b, nu, v, self.config.test_family)
        f_norm = lp_norm(f, self.config.p, mu)
        mu_ap, lambda_ap, nu_a2 = ap_constant(mu, self.config.p), ap_constant(lam, self.config.p), ap_constant(nu, 2.0)
        rows = []
        for term in product_expansion(b, f, v):
            if term.kind != 'legal':
                continue
            numerator = lp_norm(term.value, self.config.p, lam)
            flagged = bmo == 0.0 and numerator > 0.0
            ratio = float('inf') if flagged else (numerator / (bmo * f_norm) if numerator > 0.0 else 0.0)
            rows.append({'seed': seed, 'label': term.label, 'numerator': numerator, 'f_norm': f_norm, 'bmo': bmo,
                         'mu_ap': mu_ap, 'lambda_ap': lambda_ap, 'nu_a2': nu_a2, 'ratio': ratio,
                         'flagged': flagged})
        return rows

    def instance_square_function(self, seed: int) -> dict:
        """||f||_{L^p(w)} / ||S^v f||_{L^p(w)} for a mean-zero f and w = mu."""
        mu = self.load_weight('mu', seed)
        f = self.function(seed, MEAN_ZERO)
        ratio = square_function_ratio(f, self.axes(), mu, self.config.p)
        return {'seed': seed, 'label': 'S^' + ''.join(map(str, self.axes())),
                'mu_ap': ap_constant(mu, self.config.p),
                'ratio': float('inf') if ratio is None else ratio, 'flagged': ratio is None}

    def instance_fefferman_stein(self, seed: int) -> dict:
        """Vector-valued maximal inequality ratio for a family of ``family_size`` functions."""
        mu = self.load_weight('mu', seed)
        functions = [self.function(derive_seed(seed, 'family', j)) for j in range(self.config.family_size)]
        ratio = fefferman_stein_ratio(functions, self.axes(), mu, self.config.p, self.config.q)
        return {'seed': seed, 'label': f'M^{"".join(map(str, self.axes()))} q={self.config.q:g}',
                'mu_ap': ap_constant(mu, self.config.p), 'ratio': ratio, 'flagged': False}

    def instance_embedding(self, seed: int) -> dict:
        """|<b, f>| / (||S^u f||_{L^1(nu)} ||b||_{BMO^v(nu)}) with nu = mu."""
        mu = self.load_weight('mu', seed)
        u = self.axes()
        v = list(self.config.bmo_axes) if self.config.bmo_axes else u
        ratio = dual_pairing_ratio(self.symbol(seed), self.function(seed, MEAN_ZERO), mu, u, v)
        return {'seed': seed, 'label': f"u={''.join(map(str, u))} v={''.join(map(str, v))}",
                'mu_a2': ap_constant(mu, 2.0), 'ratio': ratio, 'flagged': ratio == float('inf')}
