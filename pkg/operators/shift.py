from itertools import product
from typing import Optional, Sequence, Tuple

import numpy as np

from dyadic.errors import AdmissibilityError, DyadicError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import analyse, synthesise
from dyadic.seeding import SplitMix64
from operators.model_operator import ADMISSIBILITY_SLACK, ModelOperator, packed_level, size_bound, triples


class Shift(ModelOperator):
    """
    Multi-parameter dyadic shift

        S f = sum_K sum_{I^(k) = K} sum_{J^(l) = K} a_{K,I,J} <f, h_I> h_J

    over the active axes. Coefficients are a sparse table of packed Haar indices: ``k_index``,
    ``i_index`` and ``j_index`` have shape (nnz, r) with one column per active axis.

    :param grid: Grid the operator acts on.
    :param axes: Active axes v.
    :param complexity: Per-axis (k, l) pairs.
    :param k_index: Packed K indices.
    :param i_index: Packed I indices.
    :param j_index: Packed J indices.
    :param values: Coefficients a_{K,I,J}.
    """
    kind = 'shift'

    def __init__(self, grid: MultiGrid, axes: Sequence[int], complexity: Sequence[Sequence[int]],
                 k_index=None, i_index=None, j_index=None, values=None, **kwargs):
        super().__init__(grid, axes, **kwargs)
        self.complexity: Tuple[Tuple[int, int], ...] = tuple((int(k), int(l)) for k, l in complexity)
        if len(self.complexity) != len(self.axes):
            raise DyadicError(f'complexity needs one (k, l) pair per active axis {self.axes}')
        r = len(self.axes)
        self.k_index = np.asarray(k_index if k_index is not None else np.zeros((0, r)), dtype=np.int64).reshape(-1, r)
        self.i_index = np.asarray(i_index if i_index is not None else np.zeros((0, r)), dtype=np.int64).reshape(-1, r)
        self.j_index = np.asarray(j_index if j_index is not None else np.zeros((0, r)), dtype=np.int64).reshape(-1, r)
        self.values = np.asarray(values if values is not None else np.zeros(0), dtype=np.float64).reshape(-1)
        for table in (self.k_index, self.i_index, self.j_index, self.values):
            table.setflags(write=False)
        self.validate()

    @property
    def paraproduct_free(self) -> bool:
        return True

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def validate(self):
        """Checks the index pattern and the size bound |a| <= |I|^(1/2)|J|^(1/2)/|K|."""
        nnz = self.values.size
        if not self.k_index.shape[0] == self.i_index.shape[0] == self.j_index.shape[0] == nnz:
            raise AdmissibilityError('coefficient table columns have different lengths')
        if nnz == 0:
            return
        if not np.all(np.isfinite(self.values)):
            raise AdmissibilityError('inadmissible coefficient: non-finite value')
        for column, (axis, (k, l)) in enumerate(zip(self.axes, self.complexity)):
            depth = self.grid.levels[axis]
            k_col, i_col, j_col = self.k_index[:, column], self.i_index[:, column], self.j_index[:, column]
            if np.any(i_col >= 2 ** depth) or np.any(j_col >= 2 ** depth):
                raise AdmissibilityError(f'inadmissible coefficient: index beyond depth {depth} on axis {axis}')
            if np.any(packed_level(i_col) - packed_level(k_col) != k) or np.any((i_col >> k) != k_col):
                raise AdmissibilityError(f'inadmissible coefficient: I^({k}) != K on axis {axis}')
            if np.any(packed_level(j_col) - packed_level(k_col) != l) or np.any((j_col >> l) != k_col):
                raise AdmissibilityError(f'inadmissible coefficient: J^({l}) != K on axis {axis}')
        bound = size_bound(self.k_index, self.i_index, self.j_index)
        excess = np.abs(self.values) > bound * (1.0 + ADMISSIBILITY_SLACK)
        if np.any(excess):
            first = int(np.argmax(excess))
            raise AdmissibilityError(f'inadmissible coefficient {self.values[first]!r} at K={self.k_index[first].tolist()}, '
                                     f'I={self.i_index[first].tolist()}, J={self.j_index[first].tolist()}: '
                                     f'bound {bound[first]!r}')

    def apply(self, f: GridFunction) -> GridFunction:
        self.check_input(f)
        coefficients = f.data
        for axis in self.axes:
            coefficients = analyse(coefficients, axis, 'haar')
        moved = self.front(coefficients)
        out = np.zeros_like(moved)
        if self.nnz:
            gathered = moved[tuple(self.i_index.T)]
            scale = self.values.reshape((-1,) + (1,) * (gathered.ndim - 1))
            np.add.at(out, tuple(self.j_index.T), scale * gathered)
        out = self.back(out)
        for axis in self.axes:
            out = synthesise(out, axis, 'haar')
        return GridFunction(self.grid, out)

    def adjoint(self) -> 'Shift':
        return Shift(self.grid, self.axes, [(l, k) for k, l in self.complexity], self.k_index, self.j_index,
                     self.i_index, self.values, **self.kwargs)

    def scaled(self, factor: float) -> 'Shift':
        return Shift(self.grid, self.axes, self.complexity, self.k_index, self.i_index, self.j_index,
                     self.values * factor, **self.kwargs)

    def to_dict(self) -> dict:
        return {
            'type': self.kind,
            'levels': list(self.grid.levels),
            'axes': list(self.axes),
            'complexity': [list(pair) for pair in self.complexity],
            'seed': self.seed,
            'theta': self.theta,
            'coefficients': [[k.tolist(), i.tolist(), j.tolist(), float(a)]
                             for k, i, j, a in zip(self.k_index, self.i_index, self.j_index, self.values)],
        }

    @classmethod
    def from_dict(cls, spec: dict) -> 'Shift':
        grid = MultiGrid(tuple(spec['levels']))
        rows = spec.get('coefficients', [])
        r = len(spec['axes'])
        k_index = np.array([row[0] for row in rows], dtype=np.int64).reshape(-1, r)
        i_index = np.array([row[1] for row in rows], dtype=np.int64).reshape(-1, r)
        j_index = np.array([row[2] for row in rows], dtype=np.int64).reshape(-1, r)
        values = np.array([row[3] for row in rows], dtype=np.float64)
        return cls(grid, spec['axes'], spec['complexity'], k_index, i_index, j_index, values,
                   seed=spec.get('seed'), theta=spec.get('theta'))

    @classmethod
    def full_table(cls, grid: MultiGrid, axes: Sequence[int],
                   complexity: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Every admissible (K, I, J) index triple of the given complexity."""
        per_axis = [triples(grid.levels[axis], int(k), int(l)) for axis, (k, l) in zip(axes, complexity)]
        rows = list(product(*(range(len(ks)) for ks, _, _ in per_axis)))
        if not rows:
            empty = np.zeros((0, len(axes)), dtype=np.int64)
            return empty, empty, empty
        picks = np.array(rows, dtype=np.int64)
        k_index = np.stack([per_axis[c][0][picks[:, c]] for c in range(len(axes))], axis=1)
        i_index = np.stack([per_axis[c][1][picks[:, c]] for c in range(len(axes))], axis=1)
        j_index = np.stack([per_axis[c][2][picks[:, c]] for c in range(len(axes))], axis=1)
        return k_index, i_index, j_index

    @classmethod
    def generate(cls, seed: int, grid: MultiGrid, axes: Sequence[int], complexity: Sequence[Sequence[int]],
                 theta: float = 1.0, **kwargs) -> 'Shift':
        """
        Random shift saturating ``theta`` times the size bound of every coefficient.

        Signs come from a splitmix64 stream seeded with ``seed``.
        """
        if not 0.0 <= theta <= 1.0:
            raise DyadicError(f'theta must lie in [0, 1], got {theta}')
        k_index, i_index, j_index = cls.full_table(grid, axes, complexity)
        signs = SplitMix64(seed).signs(k_index.shape[0])
        values = theta * size_bound(k_index, i_index, j_index) * signs
        return cls(grid, axes, complexity, k_index, i_index, j_index, values, seed=seed, theta=theta, **kwargs)

    @classmethod
    def haar_multiplier(cls, grid: MultiGrid, axes: Sequence[int], symbol: Optional[np.ndarray] = None,
                        **kwargs) -> 'Shift':
        """Complexity-zero shift a_{K,K,K}; the all-ones symbol removes the top components of f."""
        complexity = [(0, 0)] * len(tuple(axes))
        k_index, _, _ = cls.full_table(grid, axes, complexity)
        values = np.ones(k_index.shape[0]) if symbol is None else np.asarray(symbol, dtype=np.float64)
        return cls(grid, axes, complexity, k_index, k_index, k_index, values, **kwargs)
