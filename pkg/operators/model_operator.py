from abc import ABC, abstractmethod
from typing import Sequence, Tuple

import numpy as np

from dyadic.errors import DyadicError, GridError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import param_subset

ADMISSIBILITY_SLACK = 1e-12


class ModelOperator(ABC):
    """
    Base class for the dyadic model operators (shifts, partial and full paraproducts).

    Operators hold their coefficient tables and never materialise a matrix; ``apply`` works in
    the packed Haar layout of the active axes and treats the other axes pointwise.

    kwargs: Arbitrary keyword arguments. Possible key-value pairs are:
        - 'seed': The seed the operator was generated from, kept for reports and serialisation.
        - 'theta': The saturation fraction used by the generator.
        - 'name': A label used in logs and report columns.
    """
    kind = 'operator'

    def __init__(self, grid: MultiGrid, axes: Sequence[int], **kwargs):
        self.grid = grid
        self.axes: Tuple[int, ...] = param_subset(axes, grid.m)
        self.kwargs = kwargs
        self.seed = kwargs.get('seed')
        self.theta = kwargs.get('theta')
        self.name = kwargs.get('name', self.kind)

    @property
    def paraproduct_free(self) -> bool:
        return False

    @abstractmethod
    def apply(self, f: GridFunction) -> GridFunction:
        """
        Abstract method applying the operator to a grid function.

        Must be implemented by child classes.
        """
        pass

    @abstractmethod
    def adjoint(self) -> 'ModelOperator':
        pass

    @abstractmethod
    def to_dict(self) -> dict:
        """
        Abstract method producing the JSON-ready description of the operator.

        Must be implemented by child classes.
        """
        pass

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.apply(f)

    def __repr__(self) -> str:
        return f'{type(self).__name__}(axes={self.axes}, seed={self.seed})'

    def check_input(self, f: GridFunction):
        if f.grid != self.grid:
            raise GridError(f'operator grid {self.grid.levels} does not match function grid {f.grid.levels}')

    def front(self, data: np.ndarray) -> np.ndarray:
        """Moves the active axes to the front, in operator order."""
        return np.moveaxis(data, self.axes, range(len(self.axes)))

    def back(self, data: np.ndarray) -> np.ndarray:
        return np.moveaxis(data, range(len(self.axes)), self.axes)


def packed_level(index: np.ndarray) -> np.ndarray:
    """Level of packed Haar indices (index >= 1)."""
    index = np.asarray(index, dtype=np.int64)
    if np.any(index < 1):
        raise DyadicError('packed Haar indices must be at least 1')
    return np.floor(np.log2(index)).astype(np.int64)


def size_bound(k_index: np.ndarray, i_index: np.ndarray, j_index: np.ndarray) -> np.ndarray:
    """|I|^(1/2) |J|^(1/2) / |K| per coefficient, multiplied over the trailing axis dimension."""
    exponent = packed_level(k_index) - (packed_level(i_index) + packed_level(j_index)) / 2.0
    return np.prod(2.0 ** exponent, axis=-1)


def triples(depth: int, k: int, l: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Every packed (K, I, J) on one axis with I^(k) = K = J^(l) and both I and J cancellative.
    """
    if k < 0 or l < 0 or max(k, l) >= depth:
        raise DyadicError(f'complexity ({k}, {l}) does not fit an axis of depth {depth}')
    ks, is_, js = [], [], []
    for level in range(depth - max(k, l)):
        for k_index in range(2 ** level, 2 ** (level + 1)):
            for i_index in range(k_index << k, (k_index + 1) << k):
                for j_index in range(k_index << l, (k_index + 1) << l):
                    ks.append(k_index)
                    is_.append(i_index)
                    js.append(j_index)
    return np.array(ks, dtype=np.int64), np.array(is_, dtype=np.int64), np.array(js, dtype=np.int64)
