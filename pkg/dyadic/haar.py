"""
Haar basis on the dyadic axes of a MultiGrid.

Packed layout along a transformed axis of depth n (length N = 2^n):

- slot 0 holds the coefficient of the constant function 1 (the top average);
- slot k >= 1 holds the coefficient of h_I for the interval at level floor(log2 k) and
  position k - 2^level.

h_I = |I|^{-1/2} (1_left - 1_right). The fast kernels hard-code this sign. ``_LEFT_SIGN`` is a
mutation hook read only by ``haar_vector`` and ``haar_value``; it stays 1 outside tests.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from dyadic.errors import DyadicError, GridError
from dyadic.grid import DyadicInterval, DyadicRectangle, GridFunction, MultiGrid, check_rectangle, dyadic_pyramid

_LEFT_SIGN = 1.0

ANALYSIS_KINDS = ('full', 'haar', 'avg', 'top')
SYNTHESIS_KINDS = ('full', 'haar', 'square', 'top')


def param_subset(v: Sequence[int], m: int, allow_empty: bool = False) -> Tuple[int, ...]:
    """
    Validates an ordered list of distinct parameter axes.

    :param v: Axes (0-based).
    :param m: Number of grid parameters.
    :param allow_empty: Whether the empty subset is acceptable.
    :return: The subset as a tuple.
    """
    v = tuple(int(axis) for axis in v)
    if not v and not allow_empty:
        raise DyadicError('parameter subset must be nonempty')
    if len(set(v)) != len(v):
        raise DyadicError(f'repeated axis in parameter subset {v}')
    for axis in v:
        if not 0 <= axis < m:
            raise DyadicError(f'axis {axis} outside a grid with {m} parameters')
    return v


def packed_levels(depth: int) -> np.ndarray:
    """Level of each packed slot; slot 0 (the top average) gets -1."""
    levels = np.full(2 ** depth, -1, dtype=np.int64)
    for level in range(depth):
        levels[2 ** level: 2 ** (level + 1)] = level
    return levels


def descendant_slots(interval: DyadicInterval, k: int) -> slice:
    """Packed slots of the descendants of ``interval`` exactly k generations down."""
    level = interval.level + k
    start = 2 ** level + (interval.pos << k)
    return slice(start, start + 2 ** k)


def haar_vector(depth: int, interval: DyadicInterval) -> np.ndarray:
    if interval.level >= depth:
        raise GridError(f'no children: interval at level {interval.level} on an axis of depth {depth}')
    vector = np.zeros(2 ** depth)
    left, right = interval.children()
    height = 2.0 ** (interval.level / 2)
    vector[left.cell_slice(depth)] = _LEFT_SIGN * height
    vector[right.cell_slice(depth)] = -_LEFT_SIGN * height
    return vector


def haar_function(grid: MultiGrid, rectangle: Union[DyadicInterval, DyadicRectangle]) -> GridFunction:
    """h_R as a function on the whole grid (constant 1 along inactive axes)."""
    if isinstance(rectangle, DyadicInterval):
        rectangle = DyadicRectangle.of(rectangle)
    check_rectangle(grid, rectangle)
    data = np.ones(grid.shape)
    for interval in rectangle.intervals:
        shape = [1] * grid.m
        shape[interval.axis] = grid.cells(interval.axis)
        data = data * haar_vector(grid.levels[interval.axis], interval).reshape(shape)
    return GridFunction(grid, data)


def haar_value(interval: DyadicInterval, inner: DyadicInterval) -> float:
    """Value of h_interval on a strict dyadic sub-interval ``inner``."""
    k = interval.generations_above(inner)
    if not k:
        raise DyadicError(f'{inner} is not a strict sub-interval of {interval}')
    child = inner.ancestor(k - 1)
    sign = _LEFT_SIGN if child.pos % 2 == 0 else -_LEFT_SIGN
    return sign * 2.0 ** (interval.level / 2)


def _depth(length: int) -> int:
    depth = int(length).bit_length() - 1
    if 2 ** depth != length:
        raise GridError(f'axis length {length} is not a power of two')
    return depth


def _forward_last(x: np.ndarray) -> np.ndarray:
    depth = _depth(x.shape[-1])
    out = np.empty_like(x)
    sums = x / x.shape[-1]
    for level in range(depth - 1, -1, -1):
        left = sums[..., 0::2]
        right = sums[..., 1::2]
        out[..., 2 ** level: 2 ** (level + 1)] = 2.0 ** (level / 2) * (left - right)
        sums = left + right
    out[..., 0] = sums[..., 0]
    return out


def _inverse_last(c: np.ndarray) -> np.ndarray:
    depth = _depth(c.shape[-1])
    values = c[..., 0:1]
    for level in range(depth):
        detail = c[..., 2 ** level: 2 ** (level + 1)] * 2.0 ** (level / 2)
        finer = np.empty(values.shape[:-1] + (2 ** (level + 1),))
        finer[..., 0::2] = values + detail
        finer[..., 1::2] = values - detail
        values = finer
    return values


def _cancellative_last(x: np.ndarray) -> np.ndarray:
    out = _forward_last(x)
    out[..., 0] = 0.0
    return out


def _averages_last(x: np.ndarray) -> np.ndarray:
    depth = _depth(x.shape[-1])
    out = np.zeros_like(x)
    pyramid = dyadic_pyramid(x, x.ndim - 1, depth)
    for level in range(depth):
        out[..., 2 ** level: 2 ** (level + 1)] = pyramid[level]
    return out


def _top_last(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    out[..., 0] = x.mean(axis=-1)
    return out


def _haar_synthesis_last(c: np.ndarray) -> np.ndarray:
    c = c.copy()
    c[..., 0] = 0.0
    return _inverse_last(c)


def _square_synthesis_last(c: np.ndarray) -> np.ndarray:
    length = c.shape[-1]
    depth = _depth(length)
    out = np.zeros_like(c)
    for level in range(depth):
        weighted = c[..., 2 ** level: 2 ** (level + 1)] * 2.0 ** level
        out += np.repeat(weighted, 2 ** (depth - level), axis=-1)
    return out


def _top_synthesis_last(c: np.ndarray) -> np.ndarray:
    return np.repeat(c[..., 0:1], c.shape[-1], axis=-1)


_ANALYSIS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'full': _forward_last,
    'haar': _cancellative_last,
    'avg': _averages_last,
    'top': _top_last,
}

_SYNTHESIS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'full': _inverse_last,
    'haar': _haar_synthesis_last,
    'square': _square_synthesis_last,
    'top': _top_synthesis_last,
}


def along_axis(data: np.ndarray, axis: int, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return np.moveaxis(fn(np.moveaxis(data, axis, -1)), -1, axis)


def analyse(data: np.ndarray, axis: int, kind: str) -> np.ndarray:
    """
    Maps cell values along ``axis`` to the packed layout.

    - ``full``: orthonormal Haar coefficients including the top slot.
    - ``haar``: cancellative coefficients <phi, h_I>, top slot zero.
    - ``avg``: interval averages <phi>_I at the slot of I, top slot zero.
    - ``top``: whole-axis average in the top slot, everything else zero.
    """
    try:
        fn = _ANALYSIS[kind]
    except KeyError:
        raise ValueError(f'Unsupported analysis kind: {kind}')
    return along_axis(np.asarray(data, dtype=np.float64), axis, fn)


def synthesise(data: np.ndarray, axis: int, kind: str) -> np.ndarray:
    """
    Maps packed coefficients along ``axis`` back to cell values.

    - ``full``: inverse orthonormal transform.
    - ``haar``: sum of c_I h_I (top slot ignored).
    - ``square``: sum of c_I 1_I/|I| (top slot ignored).
    - ``top``: the top slot as a constant.
    """
    try:
        fn = _SYNTHESIS[kind]
    except KeyError:
        raise ValueError(f'Unsupported synthesis kind: {kind}')
    return along_axis(np.asarray(data, dtype=np.float64), axis, fn)


@dataclass(frozen=True, eq=False)
class HaarCoeffs:
    """
    Packed Haar coefficients of a grid function along ``axes``; other axes are untouched cells.
    """
    grid: MultiGrid
    data: np.ndarray
    axes: Tuple[int, ...]

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64).reshape(self.grid.shape)
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'axes', param_subset(self.axes, self.grid.m, allow_empty=True))

    def coefficient(self, rectangle: DyadicRectangle) -> Union[float, np.ndarray]:
        """<f, h_R>_v; a scalar when the transform covers every axis."""
        index = [slice(None)] * self.grid.m
        for interval in rectangle.intervals:
            if interval.axis not in self.axes:
                raise DyadicError(f'axis {interval.axis} was not transformed')
            index[interval.axis] = interval.packed_index
        value = self.data[tuple(index)]
        return float(value) if np.ndim(value) == 0 else value

    def inverse(self) -> GridFunction:
        return inverse_haar_transform(self)


def haar_transform(f: GridFunction, v: Sequence[int] = None) -> HaarCoeffs:
    """
    Orthonormal Haar analysis along every axis in ``v`` (all axes by default).

    :param f: Function to transform.
    :param v: Axes to transform; the others are left at cell resolution.
    :return: HaarCoeffs in the packed layout.
    """
    v = tuple(range(f.grid.m)) if v is None else param_subset(v, f.grid.m)
    data = f.data
    for axis in v:
        data = analyse(data, axis, 'full')
    return HaarCoeffs(f.grid, data, v)


def inverse_haar_transform(coeffs: HaarCoeffs) -> GridFunction:
    data = coeffs.data
    for axis in coeffs.axes:
        data = synthesise(data, axis, 'full')
    return GridFunction(coeffs.grid, data)


def _offsets_for(rectangle: DyadicRectangle, offsets) -> Dict[int, int]:
    if isinstance(offsets, dict):
        resolved = {int(axis): int(k) for axis, k in offsets.items()}
    else:
        offsets = list(offsets)
        if len(offsets) != len(rectangle.intervals):
            raise DyadicError(f'expected {len(rectangle.intervals)} offsets, got {len(offsets)}')
        resolved = {axis: int(k) for axis, k in zip(rectangle.axes, offsets)}
    if set(resolved) != set(rectangle.axes):
        raise DyadicError(f'offsets must be given for axes {rectangle.axes}')
    return resolved


def martingale_diff(f: GridFunction, rectangle: DyadicRectangle) -> GridFunction:
    """
    Multi-parameter martingale difference <f, h_R>_v (x) h_R, iterated one axis at a time.
    """
    check_rectangle(f.grid, rectangle)
    data = f.data
    for interval in rectangle.intervals:
        depth = f.grid.levels[interval.axis]
        if interval.level >= depth:
            raise GridError(f'no children: interval at the finest level {depth} on axis {interval.axis}')
        h = haar_vector(depth, interval)
        data = along_axis(data, interval.axis, lambda x: np.multiply.outer(x @ h / h.size, h))
    return GridFunction(f.grid, data)


def martingale_block(f: GridFunction, rectangle: DyadicRectangle, offsets) -> GridFunction:
    """
    Martingale block: the sum of martingale differences over all I with I^(k) = K.

    :param f: Function.
    :param rectangle: K, over the active axes v.
    :param offsets: Per-axis generation offsets k (sequence aligned with K's axes, or dict).
    :return: The block as a GridFunction.
    """
    check_rectangle(f.grid, rectangle)
    offsets = _offsets_for(rectangle, offsets)
    coeffs = haar_transform(f, rectangle.axes).data.copy()
    for interval in rectangle.intervals:
        k = offsets[interval.axis]
        depth = f.grid.levels[interval.axis]
        if k < 0 or interval.level + k >= depth:
            raise DyadicError(f'offset overflow: level {interval.level} + offset {k} on axis '
                              f'{interval.axis} of depth {depth}')
        mask = np.zeros(2 ** depth)
        mask[descendant_slots(interval, k)] = 1.0
        shape = [1] * f.grid.m
        shape[interval.axis] = mask.size
        coeffs *= mask.reshape(shape)
    return inverse_haar_transform(HaarCoeffs(f.grid, coeffs, rectangle.axes))


def telescoping_terms(phi: GridFunction, rect_i: DyadicRectangle, rect_j: DyadicRectangle,
                      rect_k: DyadicRectangle) -> List[float]:
    """
    Splits <phi>_J - <phi>_I into averaged martingale differences along each axis.

    For the i-th active axis the terms are <Delta_{J_i^(t)} phi>_{J_i x Q} for t = 1..l_i and
    -<Delta_{I_i^(s)} phi>_{I_i x Q} for s = 1..k_i, where Q takes the I intervals on earlier
    axes and the J intervals on later ones.

    :return: The individual terms, axis by axis; their sum is <phi>_J - <phi>_I.
    """
    axes = rect_k.axes
    if rect_i.axes != axes or rect_j.axes != axes:
        raise DyadicError('I, J and K must share their active axes')
    if axes != tuple(range(phi.grid.m)):
        raise DyadicError(f'rectangles must cover all {phi.grid.m} axes of phi')
    for rectangle in (rect_i, rect_j, rect_k):
        check_rectangle(phi.grid, rectangle)

    k_offsets, l_offsets = {}, {}
    for axis in axes:
        k = rect_k.interval(axis).generations_above(rect_i.interval(axis))
        l = rect_k.interval(axis).generations_above(rect_j.interval(axis))
        if k is None or l is None:
            raise DyadicError(f'K not common ancestor of I and J on axis {axis}')
        k_offsets[axis], l_offsets[axis] = k, l

    terms = []
    for position, axis in enumerate(axes):
        others = [rect_i.interval(a) for a in axes[:position]] + [rect_j.interval(a) for a in axes[position + 1:]]
        coefficients = analyse(phi.data, axis, 'haar')
        index = [slice(None)] * phi.grid.m
        for interval in others:
            index[interval.axis] = interval.cell_slice(phi.grid.levels[interval.axis])

        def averaged(ancestor: DyadicInterval, inner: DyadicInterval) -> float:
            slab = np.take(coefficients, ancestor.packed_index, axis=axis)
            local = list(index)
            del local[axis]
            return haar_value(ancestor, inner) * float(slab[tuple(local)].mean())

        j_interval = rect_j.interval(axis)
        for t in range(1, l_offsets[axis] + 1):
            terms.append(averaged(j_interval.ancestor(t), j_interval))
        i_interval = rect_i.interval(axis)
        for s in range(1, k_offsets[axis] + 1):
            terms.append(-averaged(i_interval.ancestor(s), i_interval))
    return terms
