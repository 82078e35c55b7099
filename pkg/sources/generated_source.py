import numpy as np

from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import analyse, synthesise
from dyadic.seeding import SplitMix64, derive_seed
from dyadic.weights import gen_ap_weight
from sources.source import Source


class CascadeSource(Source):
    """Multiplicative cascade weight of the given roughness."""
    ACCEPTED = frozenset({'roughness', 'seed'})

    def __init__(self, roughness: float = 0.5, **kwargs):
        super().__init__(**kwargs)
        self.roughness = float(roughness)
        self.fixed_seed = kwargs.get('seed')

    def load(self, grid: MultiGrid, seed: int) -> GridFunction:
        seed = self.fixed_seed if self.fixed_seed is not None else derive_seed(seed, self.name)
        return gen_ap_weight(seed, grid, self.roughness).values

    @property
    def label(self) -> str:
        return f'cascade:{self.roughness:g}'


class RandomFieldSource(Source):
    """
    Gaussian random function.

    - 'scale': multiplies the field.
    - 'decay': Haar coefficients at level l are damped by 2^(-decay l) along every axis.
    - 'mean_zero': removes every top-average component, so the field has zero mean along
      each axis.
    - 'seed': fixed seed instead of the per-instance one.
    """
    ACCEPTED = frozenset({'scale', 'decay', 'mean_zero', 'seed'})

    def __init__(self, scale: float = 1.0, decay: float = 0.0, mean_zero: bool = False, **kwargs):
        super().__init__(**kwargs)
        self.scale = float(scale)
        self.decay = float(decay)
        self.mean_zero = bool(mean_zero)
        self.fixed_seed = kwargs.get('seed')

    def load(self, grid: MultiGrid, seed: int) -> GridFunction:
        seed = self.fixed_seed if self.fixed_seed is not None else derive_seed(seed, self.name)
        data = SplitMix64(seed).normal(grid.total_cells).reshape(grid.shape) * self.scale
        if self.decay or self.mean_zero:
            for axis in range(grid.m):
                coefficients = analyse(data, axis, 'full')
                depth = grid.levels[axis]
                damping = np.ones(2 ** depth)
                for level in range(depth):
                    damping[2 ** level: 2 ** (level + 1)] = 2.0 ** (-self.decay * level)
                if self.mean_zero:
                    damping[0] = 0.0
                shape = [1] * grid.m
                shape[axis] = damping.size
                data = synthesise(coefficients * damping.reshape(shape), axis, 'full')
        return GridFunction(grid, data)

    @property
    def label(self) -> str:
        return 'random'


class ConstantSource(Source):
    ACCEPTED = frozenset({'value'})

    def __init__(self, value: float = 1.0, **kwargs):
        super().__init__(**kwargs)
        self.value = float(value)

    def load(self, grid: MultiGrid, seed: int) -> GridFunction:
        return GridFunction.constant(grid, self.value)

    @property
    def label(self) -> str:
        return f'constant:{self.value:g}'
