"""
Weighted BMO functionals.

Product BMO uses the Chang-Fefferman square-sum form

    sup_Omega ( nu(Omega)^-1 sum_{R subset Omega} |<b, h_R>|^2 / <nu>_R )^(1/2)

with Omega ranging over dyadic rectangles, optionally enlarged by unions of a few of them.
Everything is evaluated in the packed Haar layout, so subtree sums over R subset Q are one
bottom-up pass per axis.
"""
from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dyadic.errors import DyadicError
from dyadic.grid import GridFunction, weight_values
from dyadic.haar import along_axis, analyse, packed_levels, param_subset

TEST_FAMILIES = ('rectangles', 'rectangles_plus_unions')
UNION_POOL = 12
MAX_UNION = 3


@dataclass(frozen=True)
class Partition:
    """
    Partition of the parameter axes into disjoint nonempty blocks.

    :param blocks: Axis blocks (0-based).
    :param m: Number of parameters the blocks must cover.
    """
    blocks: Tuple[Tuple[int, ...], ...]
    m: int

    def __post_init__(self):
        blocks = tuple(tuple(int(axis) for axis in block) for block in self.blocks)
        object.__setattr__(self, 'blocks', blocks)
        seen = [axis for block in blocks for axis in block]
        if any(not block for block in blocks):
            raise DyadicError('partition blocks must be nonempty')
        if len(seen) != len(set(seen)):
            raise DyadicError(f'partition blocks overlap: {blocks}')
        if sorted(seen) != list(range(self.m)):
            raise DyadicError(f'partition {blocks} does not cover axes 0..{self.m - 1}')

    @classmethod
    def singletons(cls, m: int) -> 'Partition':
        return cls(tuple((axis,) for axis in range(m)), m)

    def selections(self) -> List[Tuple[int, ...]]:
        """Every choice of one axis per block."""
        return [tuple(choice) for choice in product(*self.blocks)]

    def to_list(self) -> List[List[int]]:
        return [list(block) for block in self.blocks]


def _weight_data(b: GridFunction, nu) -> np.ndarray:
    data = weight_values(nu)
    if data is None:
        return np.ones(b.grid.shape)
    if data.shape != b.data.shape:
        raise DyadicError('symbol and weight live on different grids')
    return data


def _subtree_last(x: np.ndarray) -> np.ndarray:
    depth = x.shape[-1].bit_length() - 1
    out = x.copy()
    for level in range(depth - 2, -1, -1):
        children = out[..., 2 ** (level + 1): 2 ** (level + 2)]
        out[..., 2 ** level: 2 ** (level + 1)] += children.reshape(children.shape[:-1] + (2 ** level, 2)).sum(axis=-1)
    return out


def _min_pool_last(x: np.ndarray) -> np.ndarray:
    depth = x.shape[-1].bit_length() - 1
    out = np.zeros_like(x)
    current = x
    for level in range(depth - 1, -1, -1):
        current = current.reshape(current.shape[:-1] + (2 ** level, 2)).min(axis=-1)
        out[..., 2 ** level: 2 ** (level + 1)] = current
    return out


def _level_measure(depth: int) -> np.ndarray:
    """|Q| per packed slot; the top slot gets 1."""
    return 2.0 ** -np.maximum(packed_levels(depth), 0)


def _broadcast(vector: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = vector.size
    return vector.reshape(shape)


def carleson_terms(b_data: np.ndarray, nu_data: np.ndarray, axes: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Packed arrays ``(e, nu_avg)`` with e_R = |<b, h_R>|^2 / <nu>_R for cancellative R over ``axes``.

    Axes outside ``axes`` stay at cell resolution (one independent slice per cell).
    """
    coefficients = b_data
    nu_avg = nu_data
    for axis in axes:
        coefficients = analyse(coefficients, axis, 'haar')
        nu_avg = analyse(nu_avg, axis, 'avg')
    safe = np.where(nu_avg > 0, nu_avg, 1.0)
    return coefficients ** 2 / safe, nu_avg


def carleson_ratios(b_data: np.ndarray, nu_data: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """
    T[Q] / nu(Q) for every cancellative rectangle Q over ``axes``, in packed layout.

    Top-slot entries are zero.
    """
    e, nu_avg = carleson_terms(b_data, nu_data, axes)
    totals = e
    measure = np.ones_like(nu_avg)
    for axis in axes:
        totals = along_axis(totals, axis, _subtree_last)
        depth = b_data.shape[axis].bit_length() - 1
        measure = measure * _broadcast(_level_measure(depth), axis, b_data.ndim)
    nu_measure = nu_avg * measure
    return np.where(nu_measure > 0, totals / np.where(nu_measure > 0, nu_measure, 1.0), 0.0)


def _union_supremum(b_data: np.ndarray, nu_data: np.ndarray, ratios: np.ndarray, pool: int, max_union: int) -> float:
    """Best ratio over unions of up to ``max_union`` rectangles drawn from the ``pool`` largest ones."""
    e, _ = carleson_terms(b_data, nu_data, range(b_data.ndim))
    order = np.argsort(ratios, axis=None)[::-1][:pool]
    candidates = [np.unravel_index(flat, ratios.shape) for flat in order if ratios.flat[flat] > 0]
    masks = []
    for slots in candidates:
        mask = np.zeros(b_data.shape, dtype=bool)
        index = []
        for axis, slot in enumerate(slots):
            length = b_data.shape[axis]
            level = int(slot).bit_length() - 1
            width = length >> level
            pos = int(slot) - 2 ** level
            index.append(slice(pos * width, (pos + 1) * width))
        mask[tuple(index)] = True
        masks.append(mask)

    cell_volume = 1.0 / b_data.size
    best = 0.0
    for size in range(2, max_union + 1):
        for group in combinations(masks, size):
            omega = np.logical_or.reduce(group)
            inside = omega.astype(np.float64)
            for axis in range(b_data.ndim):
                inside = along_axis(inside, axis, _min_pool_last)
            mass = float(nu_data[omega].sum() * cell_volume)
            best = max(best, float(np.sum(e * inside)) / mass)
    return best


def product_bmo_norm(b: GridFunction, nu=None, v: Optional[Sequence[int]] = None,
                     test_family: str = 'rectangles', pool: int = UNION_POOL, max_union: int = MAX_UNION) -> float:
    """
    Weighted dyadic product BMO norm of ``b`` over the axes ``v``.

    When ``v`` leaves some axes out, every finest-cell slice of those axes is measured on its
    own and the largest value is returned.

    :param b: Symbol.
    :param nu: Weight (Weight or GridFunction); Lebesgue when omitted.
    :param v: Active axes, all axes by default.
    :param test_family: ``rectangles`` or ``rectangles_plus_unions``.
    :param pool: Number of best rectangles the unions are formed from.
    :param max_union: Largest number of rectangles in one union.
    :return: The norm.
    """
    if test_family not in TEST_FAMILIES:
        raise DyadicError(f'Unsupported test family: {test_family}')
    v = tuple(range(b.grid.m)) if v is None else param_subset(v, b.grid.m)
    if max_union < 1 or pool < 1:
        raise DyadicError('empty test family: pool and union size must be positive')
    nu_data = _weight_data(b, nu)
    ratios = carleson_ratios(b.data, nu_data, v)
    best = float(ratios.max())
    if test_family == 'rectangles_plus_unions' and max_union > 1:
        u = [axis for axis in range(b.grid.m) if axis not in v]
        b_moved = np.moveaxis(b.data, u, range(len(u)))
        nu_moved = np.moveaxis(nu_data, u, range(len(u)))
        ratios_moved = np.moveaxis(ratios, u, range(len(u)))
        batch = b_moved.shape[:len(u)]
        for slice_index in np.ndindex(*batch):
            best = max(best, _union_supremum(b_moved[slice_index], nu_moved[slice_index],
                                             ratios_moved[slice_index], pool, max_union))
    return float(np.sqrt(best))


def bmo_v_norm(b: GridFunction, nu, v: Sequence[int]) -> float:
    """BMO^v(nu): the largest product BMO norm over v among all finest-cell slices of the other axes."""
    return product_bmo_norm(b, nu, v, 'rectangles')


def bmo_v_slices(b: GridFunction, nu, v: Sequence[int]) -> np.ndarray:
    """Per-slice product BMO norms over ``v``, indexed by the cells of the complementary axes."""
    v = param_subset(v, b.grid.m)
    ratios = carleson_ratios(b.data, _weight_data(b, nu), v)
    return np.sqrt(ratios.max(axis=v))


def little_bmo_norm(b: GridFunction, nu=None) -> float:
    """sup_R nu(R)^-1 int_R |b - <b>_R| over all dyadic rectangles with every axis active."""
    nu_data = _weight_data(b, nu)
    levels = b.grid.levels
    best = 0.0
    for combo in product(*(range(n + 1) for n in levels)):
        shape = []
        for level, n in zip(combo, levels):
            shape += [2 ** level, 2 ** (n - level)]
        inner = tuple(range(1, 2 * b.grid.m, 2))
        blocks = b.data.reshape(shape)
        oscillation = np.abs(blocks - blocks.mean(axis=inner, keepdims=True)).mean(axis=inner)
        best = max(best, float(np.max(oscillation / nu_data.reshape(shape).mean(axis=inner))))
    return best


def little_product_bmo_terms(b: GridFunction, nu, partition: Partition) -> Dict[Tuple[int, ...], float]:
    """bmo_v_norm for every one-axis-per-block selection v of the partition."""
    if partition.m != b.grid.m:
        raise DyadicError(f'partition covers {partition.m} axes, grid has {b.grid.m}')
    return {selection: bmo_v_norm(b, nu, selection) for selection in partition.selections()}


def little_product_bmo_norm(b: GridFunction, nu, partition: Partition) -> float:
    """Little product BMO: the largest BMO^v norm over selections v of the partition."""
    return max(little_product_bmo_terms(b, nu, partition).values())


def coefficient_bmo_norm(sequence: np.ndarray) -> float:
    """
    Unweighted one-parameter dyadic BMO norm of a packed coefficient sequence.

    sup_J (|J|^-1 sum_{I subset J} c_I^2)^(1/2); the top slot is ignored.
    """
    sequence = np.asarray(sequence, dtype=np.float64).copy()
    sequence[0] = 0.0
    totals = _subtree_last(sequence ** 2)
    ratio = totals / _level_measure(sequence.size.bit_length() - 1)
    return float(np.sqrt(ratio[1:].max())) if sequence.size > 1 else 0.0


def dual_pairing_ratio(b: GridFunction, f: GridFunction, nu, u: Sequence[int], v: Sequence[int]) -> float:
    """
    Empirical embedding constant |<b, f>| / (||S^u f||_{L^1(nu)} ||b||_{BMO^v(nu)}).

    :param u: Axes of the square function; must contain ``v``.
    :param v: Axes of the BMO norm.
    :return: The ratio; 0 for a vanishing pairing, inf when a denominator vanishes alone.
    """
    from dyadic.maximal import square_function

    u = param_subset(u, b.grid.m)
    v = param_subset(v, b.grid.m)
    if not set(v) <= set(u):
        raise DyadicError(f'square-function axes {u} must contain the BMO axes {v}')
    pairing = abs(float(np.sum(b.data * f.data) * b.grid.cell_volume))
    _, s_norm = square_function(f, u, nu, 1.0)
    denominator = s_norm * bmo_v_norm(b, nu, v)
    if pairing <= 1e-14 * max(1.0, b.max_abs() * f.max_abs()):
        return 0.0
    if denominator == 0.0:
        return float('inf')
    return pairing / denominator
