"""
Dyadic paraproducts and the product expansion.

Along one axis the pointwise product splits as

    b f = A_1(b, f) + A_2(b, f) + A_3(b, f) + <b> <f>,

A_1 = sum Delta_I b Delta_I f, A_2 = sum Delta_I b E_I f, A_3 = sum E_I b Delta_I f, the last
term being the top-average correction of the finite domain (flavor 0 below). Iterating over
several axes gives the composed paraproducts A_(i_1,...,i_k).
"""
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from dyadic.errors import DyadicError
from dyadic.grid import GridFunction
from dyadic.haar import analyse, param_subset, synthesise

CORRECTION = 0
ILLEGAL = 3

# flavor -> (analysis of b, analysis of f, synthesis of the product)
FLAVORS: Dict[int, Tuple[str, str, str]] = {
    0: ('top', 'top', 'top'),
    1: ('haar', 'haar', 'square'),
    2: ('haar', 'avg', 'haar'),
    3: ('avg', 'haar', 'haar'),
}


def parse_flavor(flavor: Union[int, str]) -> int:
    """Accepts 0..3 or the names ``A1``, ``A2``, ``A3``."""
    if isinstance(flavor, str):
        flavor = flavor.upper().lstrip('A')
    try:
        flavor = int(flavor)
    except ValueError:
        raise DyadicError(f'Unsupported paraproduct flavor: {flavor}')
    if flavor not in FLAVORS:
        raise DyadicError(f'Unsupported paraproduct flavor: {flavor}')
    return flavor


def analyse_pair(b_data: np.ndarray, f_data: np.ndarray, axes: Sequence[int],
                 flavors: Sequence[int]) -> np.ndarray:
    """Packed product Anal_b(b) * Anal_f(f) over ``axes``, before synthesis."""
    for axis, flavor in zip(axes, flavors):
        b_kind, f_kind, _ = FLAVORS[flavor]
        b_data = analyse(b_data, axis, b_kind)
        f_data = analyse(f_data, axis, f_kind)
    return b_data * f_data


def synthesise_flavors(data: np.ndarray, axes: Sequence[int], flavors: Sequence[int]) -> np.ndarray:
    for axis, flavor in zip(axes, flavors):
        data = synthesise(data, axis, FLAVORS[flavor][2])
    return data


def composed_paraproduct(b: GridFunction, f: GridFunction, axes: Sequence[int],
                         flavors: Sequence[Union[int, str]]) -> GridFunction:
    """
    A_(i_1..i_k)^(v_1..v_k)(b, f): the one-parameter paraproduct of flavor i_j along axis v_j,
    composed over all listed axes; other axes are multiplied pointwise.
    """
    if b.grid != f.grid:
        raise DyadicError(f'grid mismatch: {b.grid.levels} vs {f.grid.levels}')
    axes = param_subset(axes, b.grid.m)
    flavors = tuple(parse_flavor(flavor) for flavor in flavors)
    if len(flavors) != len(axes):
        raise DyadicError(f'{len(axes)} axes need {len(axes)} flavors, got {len(flavors)}')
    packed = analyse_pair(b.data, f.data, axes, flavors)
    return GridFunction(b.grid, synthesise_flavors(packed, axes, flavors))


def paraproduct(b: GridFunction, f: GridFunction, axis: int, flavor: Union[int, str]) -> GridFunction:
    """One-parameter paraproduct A_1, A_2 or A_3 along ``axis``."""
    flavor = parse_flavor(flavor)
    if flavor == CORRECTION:
        raise DyadicError('the top correction is not a paraproduct flavor')
    return composed_paraproduct(b, f, (axis,), (flavor,))


@dataclass(frozen=True, eq=False)
class ParaproductTerm:
    axes: Tuple[int, ...]
    flavors: Tuple[int, ...]
    value: GridFunction

    @property
    def correction(self) -> bool:
        return CORRECTION in self.flavors

    @property
    def illegal(self) -> bool:
        return all(flavor == ILLEGAL for flavor in self.flavors)

    @property
    def kind(self) -> str:
        if self.correction:
            return 'correction'
        return 'illegal' if self.illegal else 'legal'

    @property
    def label(self) -> str:
        return 'A' + ''.join(str(flavor) for flavor in self.flavors) + '@' + ','.join(str(axis) for axis in self.axes)


def product_expansion(b: GridFunction, f: GridFunction, v: Sequence[int]) -> List[ParaproductTerm]:
    """
    Every composed paraproduct over ``v`` plus the top corrections (flavor 0 on some axis).

    The 3^|v| non-correction terms are the paraproducts proper; all 4^|v| terms together sum
    to the pointwise product b f.
    """
    v = param_subset(v, b.grid.m)
    return [ParaproductTerm(v, flavors, composed_paraproduct(b, f, v, flavors))
            for flavors in product(sorted(FLAVORS), repeat=len(v))]
