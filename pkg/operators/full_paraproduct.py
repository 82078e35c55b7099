from typing import Dict, Sequence, Tuple

import numpy as np

from dyadic.bmo import product_bmo_norm
from dyadic.errors import DyadicError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import analyse, synthesise
from dyadic.seeding import SplitMix64
from operators.model_operator import ModelOperator

# adjoint flavor -> ((analysis s, analysis t), (synthesis s, synthesis t))
FULL_FLAVORS: Dict[str, Tuple[Tuple[str, str], Tuple[str, str]]] = {
    'none': (('haar', 'haar'), ('square', 'square')),
    'full': (('avg', 'avg'), ('haar', 'haar')),
    'partial_1': (('avg', 'haar'), ('haar', 'square')),
    'partial_2': (('haar', 'avg'), ('square', 'haar')),
}

ADJOINT_FLAVOR = {'none': 'full', 'full': 'none', 'partial_1': 'partial_2', 'partial_2': 'partial_1'}


class FullParaproduct(ModelOperator):
    """
    Bi-parameter full paraproduct

        Pi f = sum_{K_1, K_2} <a, h_{K_1} x h_{K_2}> (1_{K_1}/|K_1|) x (1_{K_2}/|K_2|) <f, h_{K_1} x h_{K_2}>

    and its adjoints: ``full`` swaps both roles, ``partial_1`` / ``partial_2`` only the first
    or second parameter.

    :param symbol: Symbol a on the two-axis sub-grid (axis order as in ``axes``); rescaled on
        construction so that its dyadic product BMO norm is at most 1.
    :param flavor: One of none, full, partial_1, partial_2.
    """
    kind = 'full'

    def __init__(self, grid: MultiGrid, axes: Sequence[int], symbol: GridFunction, flavor: str = 'none', **kwargs):
        super().__init__(grid, axes, **kwargs)
        if len(self.axes) != 2:
            raise DyadicError(f'a full paraproduct acts on two axes, got {self.axes}')
        if flavor not in FULL_FLAVORS:
            raise DyadicError(f'Unsupported full paraproduct flavor: {flavor}')
        expected = grid.sub_grid(self.axes)
        if symbol.grid != expected:
            raise DyadicError(f'symbol grid {symbol.grid.levels} does not match axes {self.axes} ({expected.levels})')
        norm = product_bmo_norm(symbol)
        self.symbol = symbol / norm if norm > 1.0 else symbol
        self.flavor = flavor
        coefficients = analyse(analyse(self.symbol.data, 0, 'haar'), 1, 'haar')
        self.coefficients = coefficients
        self.coefficients.setflags(write=False)

    def broadcast_coefficients(self) -> np.ndarray:
        s, t = self.axes
        table = self.coefficients if s < t else self.coefficients.T
        shape = [1] * self.grid.m
        shape[s] = self.grid.cells(s)
        shape[t] = self.grid.cells(t)
        return table.reshape(shape)

    def apply(self, f: GridFunction) -> GridFunction:
        self.check_input(f)
        s, t = self.axes
        (analysis_s, analysis_t), (synthesis_s, synthesis_t) = FULL_FLAVORS[self.flavor]
        packed = analyse(analyse(f.data, s, analysis_s), t, analysis_t) * self.broadcast_coefficients()
        return GridFunction(self.grid, synthesise(synthesise(packed, s, synthesis_s), t, synthesis_t))

    def adjoint(self) -> 'FullParaproduct':
        return FullParaproduct(self.grid, self.axes, self.symbol, ADJOINT_FLAVOR[self.flavor], **self.kwargs)

    def to_dict(self) -> dict:
        return {
            'type': self.kind,
            'levels': list(self.grid.levels),
            'axes': list(self.axes),
            'flavor': self.flavor,
            'seed': self.seed,
            'theta': self.theta,
            'symbol': self.symbol.data.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, spec: dict) -> 'FullParaproduct':
        grid = MultiGrid(tuple(spec['levels']))
        symbol = GridFunction(grid.sub_grid(spec['axes']), np.array(spec['symbol'], dtype=np.float64))
        return cls(grid, spec['axes'], symbol, spec.get('flavor', 'none'), seed=spec.get('seed'), theta=spec.get('theta'))

    @classmethod
    def generate(cls, seed: int, grid: MultiGrid, axes: Sequence[int], theta: float = 1.0,
                 flavor: str = 'none', **kwargs) -> 'FullParaproduct':
        """Random symbol rescaled to product BMO norm exactly ``theta``."""
        if not 0.0 <= theta <= 1.0:
            raise DyadicError(f'theta must lie in [0, 1], got {theta}')
        sub_grid = grid.sub_grid(axes)
        raw = SplitMix64(seed).normal(sub_grid.total_cells).reshape(sub_grid.shape)
        symbol = GridFunction(sub_grid, raw)
        norm = product_bmo_norm(symbol)
        symbol = symbol * (theta / norm) if norm > 0 else symbol * 0.0
        return cls(grid, axes, symbol, flavor, seed=seed, theta=theta, **kwargs)
