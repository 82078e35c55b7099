from dataclasses import dataclass
from itertools import product
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from dyadic.errors import GridError, WeightError

MAX_PARAMETERS = 6
MAX_LEVEL = 12
MAX_TOTAL_LEVEL = 24


@dataclass(frozen=True)
class MultiGrid:
    """
    Tensor-product dyadic discretisation of [0,1)^m.

    Axis ``i`` carries ``2**levels[i]`` cells, so every cell is a dyadic rectangle whose
    volume is an exact power of two.

    :param levels: Per-parameter depth n_i, 1 <= n_i <= 12, with sum(n_i) <= 24.
    """
    levels: Tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels)
        object.__setattr__(self, 'levels', levels)
        if not 1 <= len(levels) <= MAX_PARAMETERS:
            raise GridError(f'a grid needs between 1 and {MAX_PARAMETERS} parameters, got {len(levels)}')
        for n in levels:
            if not 1 <= n <= MAX_LEVEL:
                raise GridError(f'invalid level {n}: depth must lie in 1..{MAX_LEVEL}')
        if sum(levels) > MAX_TOTAL_LEVEL:
            raise GridError(f'grid with levels {levels} exceeds 2^{MAX_TOTAL_LEVEL} cells')

    @property
    def m(self) -> int:
        return len(self.levels)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(2 ** n for n in self.levels)

    @property
    def total_cells(self) -> int:
        return 2 ** sum(self.levels)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** -sum(self.levels)

    def cells(self, axis: int) -> int:
        return 2 ** self.levels[axis]

    def sub_grid(self, axes: Sequence[int]) -> 'MultiGrid':
        return MultiGrid(tuple(self.levels[a] for a in axes))

    def intervals(self, axis: int, level: int) -> List['DyadicInterval']:
        """All dyadic intervals of ``axis`` at ``level``; they tile [0,1)."""
        if not 0 <= level <= self.levels[axis]:
            raise GridError(f'invalid level {level} on axis {axis}')
        return [DyadicInterval(axis, level, pos) for pos in range(2 ** level)]

    def all_intervals(self, axis: int, max_level: Optional[int] = None) -> Iterator['DyadicInterval']:
        top = self.levels[axis] if max_level is None else max_level
        for level in range(top + 1):
            yield from self.intervals(axis, level)

    def rectangles(self, axes: Optional[Sequence[int]] = None, cancellative: bool = False) -> Iterator['DyadicRectangle']:
        """
        Enumerates every dyadic rectangle over ``axes``.

        :param axes: Active axes, all grid axes by default.
        :param cancellative: Only rectangles whose intervals have children (level < n_i).
        """
        axes = tuple(range(self.m)) if axes is None else tuple(axes)
        per_axis = []
        for axis in axes:
            top = self.levels[axis] - 1 if cancellative else self.levels[axis]
            per_axis.append(list(self.all_intervals(axis, top)))
        for combo in product(*per_axis):
            yield DyadicRectangle(combo)


@dataclass(frozen=True)
class DyadicInterval:
    """
    Dyadic interval [pos 2^-level, (pos+1) 2^-level) on one parameter axis.
    """
    axis: int
    level: int
    pos: int

    def __post_init__(self):
        if self.level < 0:
            raise GridError(f'invalid level {self.level}')
        if not 0 <= self.pos < 2 ** self.level:
            raise GridError(f'position {self.pos} outside level {self.level}')

    @classmethod
    def from_packed(cls, axis: int, index: int) -> 'DyadicInterval':
        if index < 1:
            raise GridError('packed index 0 is the top average, not an interval')
        level = int(index).bit_length() - 1
        return cls(axis, level, int(index) - 2 ** level)

    @property
    def measure(self) -> float:
        return 2.0 ** -self.level

    @property
    def packed_index(self) -> int:
        return 2 ** self.level + self.pos

    def ancestor(self, k: int) -> 'DyadicInterval':
        """The dyadic ancestor k generations up."""
        if not 0 <= k <= self.level:
            raise GridError(f'ancestor {k} does not exist for level {self.level}')
        return DyadicInterval(self.axis, self.level - k, self.pos >> k)

    def children(self) -> Tuple['DyadicInterval', 'DyadicInterval']:
        return (DyadicInterval(self.axis, self.level + 1, 2 * self.pos),
                DyadicInterval(self.axis, self.level + 1, 2 * self.pos + 1))

    def descendants(self, k: int) -> List['DyadicInterval']:
        return [DyadicInterval(self.axis, self.level + k, (self.pos << k) + j) for j in range(2 ** k)]

    def contains(self, other: 'DyadicInterval') -> bool:
        return (other.axis == self.axis and other.level >= self.level
                and other.pos >> (other.level - self.level) == self.pos)

    def generations_above(self, other: 'DyadicInterval') -> Optional[int]:
        """k such that other^(k) == self, or None."""
        if not self.contains(other):
            return None
        return other.level - self.level

    def cell_slice(self, depth: int) -> slice:
        if self.level > depth:
            raise GridError(f'invalid level {self.level} for an axis of depth {depth}')
        width = 2 ** (depth - self.level)
        return slice(self.pos * width, (self.pos + 1) * width)


@dataclass(frozen=True)
class DyadicRectangle:
    """
    Product of dyadic intervals over a nonempty set of active parameters.
    """
    intervals: Tuple[DyadicInterval, ...]

    def __post_init__(self):
        intervals = tuple(sorted(self.intervals, key=lambda interval: interval.axis))
        object.__setattr__(self, 'intervals', intervals)
        if not intervals:
            raise GridError('a rectangle needs at least one active parameter')
        axes = [interval.axis for interval in intervals]
        if len(set(axes)) != len(axes):
            raise GridError(f'repeated axis in rectangle: {axes}')

    @classmethod
    def of(cls, *intervals: DyadicInterval) -> 'DyadicRectangle':
        return cls(tuple(intervals))

    @classmethod
    def whole(cls, axes: Sequence[int]) -> 'DyadicRectangle':
        return cls(tuple(DyadicInterval(axis, 0, 0) for axis in axes))

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(interval.axis for interval in self.intervals)

    @property
    def measure(self) -> float:
        return float(np.prod([interval.measure for interval in self.intervals]))

    def interval(self, axis: int) -> DyadicInterval:
        for interval in self.intervals:
            if interval.axis == axis:
                return interval
        raise GridError(f'axis {axis} is not active in this rectangle')

    def replace(self, interval: DyadicInterval) -> 'DyadicRectangle':
        kept = [current for current in self.intervals if current.axis != interval.axis]
        return DyadicRectangle(tuple(kept) + (interval,))

    def restrict(self, axes: Sequence[int]) -> 'DyadicRectangle':
        return DyadicRectangle(tuple(self.interval(axis) for axis in axes))

    def index(self, grid: MultiGrid) -> Tuple[Union[slice, int], ...]:
        """Numpy index selecting the finest cells covered by the rectangle."""
        check_rectangle(grid, self)
        index = [slice(None)] * grid.m
        for interval in self.intervals:
            index[interval.axis] = interval.cell_slice(grid.levels[interval.axis])
        return tuple(index)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """
    Piecewise constant function on the finest cells of a grid.

    The data array is copied, reshaped to ``grid.shape`` and frozen, so a GridFunction can be
    shared freely between threads.
    """
    grid: MultiGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.size != self.grid.total_cells:
            raise GridError(f'data has {data.size} entries, grid {self.grid.levels} has {self.grid.total_cells} cells')
        data = data.reshape(self.grid.shape)
        if not np.all(np.isfinite(data)):
            raise GridError('grid function entries must be finite')
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @classmethod
    def constant(cls, grid: MultiGrid, value: float) -> 'GridFunction':
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def indicator(cls, grid: MultiGrid, rectangle: DyadicRectangle) -> 'GridFunction':
        data = np.zeros(grid.shape)
        data[rectangle.index(grid)] = 1.0
        return cls(grid, data)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise GridError(f'grid mismatch: {self.grid.levels} vs {other.grid.levels}')
            return other.data
        return np.asarray(other, dtype=np.float64)

    def __add__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self.data + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self.data - self._coerce(other))

    def __rsub__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self._coerce(other) - self.data)

    def __mul__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self.data * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> 'GridFunction':
        return GridFunction(self.grid, self.data / float(scalar))

    def __neg__(self) -> 'GridFunction':
        return GridFunction(self.grid, -self.data)

    def abs(self) -> 'GridFunction':
        return GridFunction(self.grid, np.abs(self.data))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))

    def allclose(self, other: 'GridFunction', rtol: float = 1e-12, atol: float = 0.0) -> bool:
        return bool(np.allclose(self.data, self._coerce(other), rtol=rtol, atol=atol))


def check_rectangle(grid: MultiGrid, rectangle: DyadicRectangle):
    for interval in rectangle.intervals:
        if not 0 <= interval.axis < grid.m:
            raise GridError(f'axis {interval.axis} outside a grid with {grid.m} parameters')
        if interval.level > grid.levels[interval.axis]:
            raise GridError(f'invalid level {interval.level} on axis {interval.axis} '
                            f'(depth {grid.levels[interval.axis]})')


def average(f: GridFunction, rectangle: DyadicRectangle) -> Union[float, GridFunction]:
    """
    Integral average of ``f`` over a dyadic rectangle.

    When the rectangle is active on every axis the result is a scalar; otherwise it is the
    partial average, a GridFunction on the remaining axes.

    :param f: The function to average.
    :param rectangle: Rectangle over a subset of the grid axes.
    :return: float or GridFunction on the complementary axes.
    """
    block = f.data[rectangle.index(f.grid)]
    axes = rectangle.axes
    if len(axes) == f.grid.m:
        return float(block.mean())
    remaining = [axis for axis in range(f.grid.m) if axis not in axes]
    return GridFunction(f.grid.sub_grid(remaining), block.mean(axis=axes))


def inner_product(f: GridFunction, g: GridFunction, axes: Optional[Sequence[int]] = None) -> Union[float, GridFunction]:
    """
    Integral pairing of ``f`` and ``g``.

    :param f: Function on the full grid.
    :param g: Function on the same grid, or on the sub-product ``axes`` of it.
    :param axes: Axes of ``f`` that ``g`` lives on, required when ``g`` is on fewer axes.
    :return: The scalar pairing, or the partial pairing as a GridFunction on the other axes.
    """
    if axes is None:
        if g.grid != f.grid:
            raise GridError(f'grid mismatch: {f.grid.levels} vs {g.grid.levels}')
        return float(np.sum(f.data * g.data) * f.grid.cell_volume)

    axes = tuple(axes)
    if len(set(axes)) != len(axes) or len(axes) != g.grid.m:
        raise GridError(f'axes {axes} do not describe a {g.grid.m}-parameter factor')
    if tuple(f.grid.levels[a] for a in axes) != g.grid.levels:
        raise GridError(f'grid mismatch on axes {axes}: {g.grid.levels}')
    order = np.argsort(axes)
    sorted_axes = tuple(axes[i] for i in order)
    g_data = np.transpose(g.data, order)
    shape = [1] * f.grid.m
    for axis in sorted_axes:
        shape[axis] = f.grid.cells(axis)
    volume = 2.0 ** -sum(g.grid.levels)
    paired = np.sum(f.data * g_data.reshape(shape), axis=sorted_axes) * volume
    remaining = [axis for axis in range(f.grid.m) if axis not in axes]
    if not remaining:
        return float(paired)
    return GridFunction(f.grid.sub_grid(remaining), paired)


def weight_values(w) -> Optional[np.ndarray]:
    """Raw strictly positive values of a weight-like argument (Weight, GridFunction or None)."""
    if w is None:
        return None
    values = getattr(w, 'values', w)
    data = values.data if isinstance(values, GridFunction) else np.asarray(values, dtype=np.float64)
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise WeightError('not a weight: entries must be strictly positive and finite')
    return data


def lp_norm(f: GridFunction, p: float, w=None) -> float:
    """
    Weighted L^p norm (sum |f|^p w |cell|)^(1/p).

    :param f: The function.
    :param p: Exponent in (0, inf).
    :param w: Weight (Weight or GridFunction); Lebesgue measure when omitted.
    :return: The norm.
    """
    if not 0 < p < np.inf:
        raise ValueError(f'exponent p must lie in (0, inf), got {p}')
    w_data = weight_values(w)
    integrand = np.abs(f.data) ** p
    if w_data is not None:
        if w_data.shape != f.data.shape:
            raise GridError('weight and function live on different grids')
        integrand = integrand * w_data
    return float(np.sum(integrand) * f.grid.cell_volume) ** (1.0 / p)


def dyadic_pyramid(data: np.ndarray, axis: int, depth: int) -> List[np.ndarray]:
    """
    Averages of ``data`` over every dyadic level of one axis.

    Entry ``l`` of the result has ``2**l`` entries along ``axis``; entry ``depth`` is ``data``.
    """
    pyramid = [data] * (depth + 1)
    current = data
    for level in range(depth - 1, -1, -1):
        shape = current.shape[:axis] + (2 ** level, 2) + current.shape[axis + 1:]
        current = current.reshape(shape).mean(axis=axis + 1)
        pyramid[level] = current
    return pyramid


def rectangle_averages(data: np.ndarray, levels: Sequence[int], axes: Sequence[int]) -> Iterator[Tuple[Tuple[int, ...], np.ndarray]]:
    """
    Yields ``(level combination, averages)`` for every level combination over ``axes``.

    Axes outside ``axes`` stay at full resolution, so each yielded array holds the averages over
    all dyadic rectangles of that shape and every finest-cell slice of the other axes.
    """
    axes = tuple(axes)

    def recurse(current: np.ndarray, position: int, prefix: Tuple[int, ...]):
        if position == len(axes):
            yield prefix, current
            return
        axis = axes[position]
        for level, averaged in enumerate(dyadic_pyramid(current, axis, levels[axis])):
            yield from recurse(averaged, position + 1, prefix + (level,))

    yield from recurse(data, 0, ())


def refine(coarse: np.ndarray, axis: int, cells: int) -> np.ndarray:
    """Broadcasts per-interval values back onto the finest cells along ``axis``."""
    return np.repeat(coarse, cells // coarse.shape[axis], axis=axis)
