from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from dyadic.errors import WeightError
from dyadic.grid import GridFunction, MultiGrid, rectangle_averages, weight_values
from dyadic.seeding import SplitMix64


@dataclass(frozen=True, eq=False)
class Weight:
    """
    Strictly positive grid function used as a density.

    :param values: The weight values.
    :param declared_class: Optional ``(p, bound)`` metadata carried from generation or config.
    """
    values: GridFunction
    declared_class: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        weight_values(self.values)

    @classmethod
    def constant(cls, grid: MultiGrid, value: float = 1.0) -> 'Weight':
        return cls(GridFunction.constant(grid, value))

    @classmethod
    def from_array(cls, grid: MultiGrid, data: np.ndarray) -> 'Weight':
        return cls(GridFunction(grid, data))

    @property
    def grid(self) -> MultiGrid:
        return self.values.grid

    @property
    def data(self) -> np.ndarray:
        return self.values.data

    def power(self, exponent: float) -> 'Weight':
        return Weight(GridFunction(self.grid, self.data ** exponent))

    def measure(self, index) -> float:
        """w(R) for a numpy index produced by ``DyadicRectangle.index``."""
        return float(self.data[index].sum() * self.grid.cell_volume)


def _check_exponent(p: float):
    if not 1 < p < np.inf:
        raise WeightError(f'A_p needs 1 < p < inf, got {p}')


def _paired_averages(first: np.ndarray, second: np.ndarray, levels: Sequence[int],
                     axes: Sequence[int]) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    for (_, a), (_, b) in zip(rectangle_averages(first, levels, axes), rectangle_averages(second, levels, axes)):
        yield a, b


def _ap_over(w: Weight, p: float, axes: Sequence[int]) -> float:
    _check_exponent(p)
    dual = w.data ** (-1.0 / (p - 1.0))
    best = 0.0
    for w_avg, dual_avg in _paired_averages(w.data, dual, w.grid.levels, axes):
        best = max(best, float(np.max(w_avg * dual_avg ** (p - 1.0))))
    return best


def ap_constant(w: Weight, p: float) -> float:
    """
    Multi-parameter dyadic A_p constant sup_R <w>_R <w^(1-p')>_R^(p-1).

    The supremum runs over every dyadic rectangle of the grid, all levels including the whole
    domain.
    """
    return _ap_over(w, p, range(w.grid.m))


def slice_ap_constant(w: Weight, p: float, axis: int) -> float:
    """One-parameter A_p constant along ``axis``, uniformly over all finest-cell slices of the other axes."""
    return _ap_over(w, p, (axis,))


def ainf_constant(w: Weight, axis: int) -> float:
    """
    One-parameter A_inf constant sup_I <w>_I exp(<log w^-1>_I) along ``axis``, maximised over slices.
    """
    best = 0.0
    for w_avg, log_avg in _paired_averages(w.data, np.log(w.data), w.grid.levels, (axis,)):
        best = max(best, float(np.max(w_avg * np.exp(-log_avg))))
    return best


def bloom_weight(mu: Weight, lam: Weight, p: float) -> Weight:
    """nu = mu^(1/p) lambda^(-1/p)."""
    _check_exponent(p)
    if mu.grid != lam.grid:
        raise WeightError(f'weights live on different grids: {mu.grid.levels} vs {lam.grid.levels}')
    return Weight(GridFunction(mu.grid, mu.data ** (1.0 / p) * lam.data ** (-1.0 / p)))


def gen_ap_weight(seed: int, grid: MultiGrid, roughness: float) -> Weight:
    """
    Multiplicative dyadic cascade weight.

    Refinement proceeds level by level, one axis at a time. Each parent cell splits into two
    children multiplied by (1 + s e) and (1 - s e), with e uniform on [0, roughness] and s a
    random sign, all drawn from a splitmix64 stream seeded with ``seed``.

    :param seed: 64-bit seed.
    :param grid: Target grid.
    :param roughness: Cascade amplitude in [0, 1).
    :return: A strictly positive Weight; constant 1 when roughness is 0.
    """
    if not 0.0 <= roughness < 1.0:
        raise WeightError(f'roughness must lie in [0, 1), got {roughness}')
    rng = SplitMix64(seed)
    values = np.ones((1,) * grid.m)
    for level in range(max(grid.levels)):
        for axis in range(grid.m):
            if level >= grid.levels[axis]:
                continue
            amplitude = rng.uniform(values.size, 0.0, roughness) * rng.signs(values.size)
            amplitude = amplitude.reshape(values.shape)
            factors = np.stack([1.0 + amplitude, 1.0 - amplitude], axis=axis + 1)
            children = np.repeat(values, 2, axis=axis)
            values = children * factors.reshape(children.shape)
    return Weight(GridFunction(grid, values))
