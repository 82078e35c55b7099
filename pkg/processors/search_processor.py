from typing import List

import pandas as pd

from config import ExperimentConfig
from dyadic.search import worst_case_search
from processors.ensemble_processor import EnsembleProcessor


class SearchProcessor(EnsembleProcessor):
    """
    Worst-case search started from every ensemble instance.

    The best record of each search is a report row; the per-iteration best ratios go to the
    ``<output>.trajectory.csv`` side file.
    """

    experiments = ('search',)

    def __init__(self, config: ExperimentConfig, **kwargs):
        super().__init__(config, **kwargs)
        self.trajectories: List[dict] = []

    def _run(self) -> List[dict]:
        self.console.log(f'{self.config.name}: searching from {self.config.ensemble} starts, '
                         f'budget {self.config.budget}')
        rows = self.map_instances(self.instance_search, self.config.instance_seeds())
        self.trajectories = [point for row in rows for point in row.pop('trajectory')]
        return rows

    def instance_search(self, seed: int) -> dict:
        mu, lam = self.weights(seed)
        spec = self.commutator_spec(seed, self.symbol(seed))
        result = worst_case_search(spec, mu, lam, self.config.p, self.config.budget, seed, self.function(seed))
        trajectory = [{'seed': seed, 'iteration': iteration, 'ratio': ratio}
                      for iteration, ratio in enumerate(result.trajectory)]
        return {'seed': seed, 'label': self.operator_label(spec), 'iterations': len(result.trajectory) - 1,
                'start_ratio': result.trajectory[0], **result.best.to_dict(), 'trajectory': trajectory}

    def write_csv(self):
        path = super().write_csv()
        frame = pd.DataFrame(self.trajectories, columns=['seed', 'iteration', 'ratio'])
        frame = frame.sort_values(['seed', 'iteration'], kind='mergesort')
        frame.to_csv(path.with_name(path.stem + '.trajectory.csv'), index=False, lineterminator='\n',
                     float_format='%.17g')
        return path
