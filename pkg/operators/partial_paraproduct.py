from typing import Sequence, Tuple

import numpy as np

from dyadic.bmo import coefficient_bmo_norm
from dyadic.errors import AdmissibilityError, DyadicError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import analyse, synthesise
from dyadic.seeding import SplitMix64
from operators.model_operator import ADMISSIBILITY_SLACK, ModelOperator, size_bound, triples


class PartialParaproduct(ModelOperator):
    """
    Partial paraproduct: shift structure on axis ``s``, paraproduct structure on axis ``t``.

        P f = sum_{K_s, I_s, J_s} sum_{K_t} <a_{K_s,I_s,J_s}, h_{K_t}> <f, h_{I_s} x h_{K_t}> h_{J_s} x 1_{K_t}/|K_t|

    ``sequences[n]`` is the packed coefficient sequence over K_t of the n-th (K_s, I_s, J_s)
    triple. With ``adjoint=True`` the operator is P*, which pairs f with h_{J_s} x 1_{K_t}/|K_t|
    and synthesises h_{I_s} x h_{K_t}.
    """
    kind = 'partial'

    def __init__(self, grid: MultiGrid, axes: Sequence[int], complexity: Sequence[int],
                 k_index=None, i_index=None, j_index=None, sequences=None, adjoint: bool = False, **kwargs):
        super().__init__(grid, axes, **kwargs)
        if len(self.axes) != 2:
            raise DyadicError(f'a partial paraproduct acts on two axes, got {self.axes}')
        self.complexity: Tuple[int, int] = (int(complexity[0]), int(complexity[1]))
        self.is_adjoint = bool(adjoint)
        self.k_index = np.asarray(k_index if k_index is not None else [], dtype=np.int64).reshape(-1)
        self.i_index = np.asarray(i_index if i_index is not None else [], dtype=np.int64).reshape(-1)
        self.j_index = np.asarray(j_index if j_index is not None else [], dtype=np.int64).reshape(-1)
        length = grid.cells(self.axes[1])
        self.sequences = np.asarray(sequences if sequences is not None else np.zeros((0, length)),
                                    dtype=np.float64).reshape(-1, length).copy()
        self.sequences[:, 0] = 0.0
        for table in (self.k_index, self.i_index, self.j_index, self.sequences):
            table.setflags(write=False)
        self.validate()

    @property
    def shift_axis(self) -> int:
        return self.axes[0]

    @property
    def paraproduct_axis(self) -> int:
        return self.axes[1]

    def validate(self):
        """Checks the index pattern and ||a_{K,I,J}||_BMO <= |I_s|^(1/2)|J_s|^(1/2)/|K_s|."""
        count = self.sequences.shape[0]
        if not self.k_index.size == self.i_index.size == self.j_index.size == count:
            raise AdmissibilityError('coefficient table columns have different lengths')
        if count == 0:
            return
        k, l = self.complexity
        depth = self.grid.levels[self.shift_axis]
        if np.any(self.i_index >= 2 ** depth) or np.any(self.j_index >= 2 ** depth) or np.any(self.k_index < 1):
            raise AdmissibilityError(f'inadmissible coefficient: index outside an axis of depth {depth}')
        if np.any((self.i_index >> k) != self.k_index) or np.any((self.j_index >> l) != self.k_index) \
                or np.any(self.i_index < self.k_index << k) or np.any(self.j_index < self.k_index << l):
            raise AdmissibilityError(f'inadmissible coefficient: indices do not match complexity ({k}, {l})')
        if not np.all(np.isfinite(self.sequences)):
            raise AdmissibilityError('inadmissible coefficient: non-finite value')
        bounds = size_bound(self.k_index[:, None], self.i_index[:, None], self.j_index[:, None])
        for n, (sequence, bound) in enumerate(zip(self.sequences, bounds)):
            norm = coefficient_bmo_norm(sequence)
            if norm > bound * (1.0 + ADMISSIBILITY_SLACK):
                raise AdmissibilityError(f'inadmissible coefficient sequence {n}: BMO norm {norm!r} exceeds {bound!r}')

    def apply(self, f: GridFunction) -> GridFunction:
        self.check_input(f)
        s, t = self.axes
        if self.is_adjoint:
            source, target = self.j_index, self.i_index
            kinds = ('haar', 'avg')
            synthesis = ('haar', 'haar')
        else:
            source, target = self.i_index, self.j_index
            kinds = ('haar', 'haar')
            synthesis = ('haar', 'square')
        coefficients = analyse(analyse(f.data, s, kinds[0]), t, kinds[1])
        moved = self.front(coefficients)
        out = np.zeros_like(moved)
        if source.size:
            gathered = moved[source]
            scale = self.sequences.reshape(self.sequences.shape + (1,) * (gathered.ndim - 2))
            np.add.at(out, target, scale * gathered)
        out = self.back(out)
        return GridFunction(self.grid, synthesise(synthesise(out, s, synthesis[0]), t, synthesis[1]))

    def adjoint(self) -> 'PartialParaproduct':
        return PartialParaproduct(self.grid, self.axes, self.complexity, self.k_index, self.i_index, self.j_index,
                                  self.sequences, adjoint=not self.is_adjoint, **self.kwargs)

    def to_dict(self) -> dict:
        return {
            'type': self.kind,
            'levels': list(self.grid.levels),
            'axes': list(self.axes),
            'complexity': list(self.complexity),
            'adjoint': self.is_adjoint,
            'seed': self.seed,
            'theta': self.theta,
            'coefficients': [[int(k), int(i), int(j), sequence.tolist()]
                             for k, i, j, sequence in zip(self.k_index, self.i_index, self.j_index, self.sequences)],
        }

    @classmethod
    def from_dict(cls, spec: dict) -> 'PartialParaproduct':
        grid = MultiGrid(tuple(spec['levels']))
        rows = spec.get('coefficients', [])
        length = grid.cells(spec['axes'][1])
        return cls(grid, spec['axes'], spec['complexity'],
                   [row[0] for row in rows], [row[1] for row in rows], [row[2] for row in rows],
                   np.array([row[3] for row in rows], dtype=np.float64).reshape(-1, length),
                   adjoint=spec.get('adjoint', False), seed=spec.get('seed'), theta=spec.get('theta'))

    @classmethod
    def generate(cls, seed: int, grid: MultiGrid, axes: Sequence[int], complexity: Sequence[int],
                 theta: float = 1.0, adjoint: bool = False, **kwargs) -> 'PartialParaproduct':
        """
        Random partial paraproduct whose coefficient sequences sit at exactly ``theta`` times
        their BMO bound.
        """
        if not 0.0 <= theta <= 1.0:
            raise DyadicError(f'theta must lie in [0, 1], got {theta}')
        s, t = axes
        k_index, i_index, j_index = triples(grid.levels[s], int(complexity[0]), int(complexity[1]))
        rng = SplitMix64(seed)
        length = grid.cells(t)
        sequences = rng.normal(k_index.size * length).reshape(k_index.size, length)
        sequences[:, 0] = 0.0
        bounds = size_bound(k_index[:, None], i_index[:, None], j_index[:, None])
        for n in range(k_index.size):
            norm = coefficient_bmo_norm(sequences[n])
            sequences[n] *= theta * bounds[n] / norm if norm > 0 else 0.0
        return cls(grid, axes, complexity, k_index, i_index, j_index, sequences, adjoint=adjoint,
                   seed=seed, theta=theta, **kwargs)
