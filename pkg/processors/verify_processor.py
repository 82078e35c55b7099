import json
from itertools import product
from pathlib import Path
from typing import Callable, List, Sequence, Tuple

import numpy as np

from config import ExperimentConfig
from dyadic.commutator import (CommutatorSpec, average_brackets, check_general_terms, commutator_apply,
                               commutator_expand, illegal_group, regroup_illegal, shift_combinations,
                               telescoped_bracket)
from dyadic.errors import IdentityError
from dyadic.grid import DyadicRectangle, GridFunction, MultiGrid, lp_norm
from dyadic.haar import (haar_transform, haar_vector, inverse_haar_transform, martingale_block,
                         martingale_diff, telescoping_terms)
from dyadic.maximal import square_function
from dyadic.paraproducts import product_expansion
from dyadic.seeding import SplitMix64, derive_seed
from operators import gen_full, gen_partial, gen_shift
from processors.experiment_processor import ExperimentProcessor

SUITES = ('orthonormality', 'parseval', 'decomposition', 'telescoping', 'product_expansion',
          'commutator_expansion', 'commutator_mixed')
CANONICAL_GRIDS = tuple(tuple([depth] * m) for m in (1, 2, 3) for depth in (2, 3, 4))
MIXED_GRIDS = ((2, 2, 2), (3, 3, 3), (2, 2, 2, 2))

ORTHONORMALITY_TOLERANCE = 1e-15
ROUND_TRIP_TOLERANCE = 1e-13
DECOMPOSITION_TOLERANCE = 1e-13
TELESCOPING_TOLERANCE = 1e-12
PRODUCT_TOLERANCE = 1e-12
COMMUTATOR_TOLERANCE = 1e-11


def _relative_error(actual: GridFunction, expected: GridFunction) -> float:
    scale = max(expected.max_abs(), actual.max_abs(), 1e-300)
    return (actual - expected).max_abs() / scale


def _total(values: Sequence[GridFunction]) -> GridFunction:
    total = values[0]
    for value in values[1:]:
        total = total + value
    return total


class VerifyProcessor(ExperimentProcessor):
    """
    Exact-identity suites over a set of grids.

    Every (suite, grid) pair gets its own seed ``derive_seed(seed, suite, *levels)``; the first
    violation writes a replay artifact and raises ``IdentityError``.
    """

    def __init__(self, config: ExperimentConfig, **kwargs):
        super().__init__(config, **kwargs)
        self.suites = list(config.suites or SUITES)
        unknown = [suite for suite in self.suites if suite not in SUITES]
        if unknown:
            raise ValueError(f'Unsupported verification suites: {unknown}')
        self.grids = [tuple(levels) for levels in config.grids] if config.grids else None
        self.telescoping_cap = config.telescoping_cap
        self.statistic = 'max_error'
        self.sort_columns = []
        # verification runs never freeze a fixture
        self.fixture_mode = 'off'

    def grids_for(self, suite: str) -> List[Tuple[int, ...]]:
        if self.grids is not None:
            return self.grids
        if suite == 'commutator_mixed':
            return list(MIXED_GRIDS)
        return list(CANONICAL_GRIDS)

    def _run(self) -> List[dict]:
        rows = []
        for suite in self.suites:
            for levels in self.grids_for(suite):
                seed = derive_seed(self.config.seed, suite, *levels)
                rows.append(self.run_suite(suite, levels, seed))
                self.console.log(f'verify {suite} {list(levels)}: ok', style='green')
        return rows

    def run_suite(self, suite: str, levels: Sequence[int], seed: int) -> dict:
        grid = MultiGrid(tuple(levels))
        check: Callable[[MultiGrid, int], Tuple[int, float]] = getattr(self, f'suite_{suite}')
        try:
            checks, max_error = check(grid, seed)
        except IdentityError as e:
            artifact = self.write_replay(suite, seed, levels, str(e))
            raise IdentityError(f'{suite} on grid {list(levels)} (seed {seed}): {e}', str(artifact))
        return {'suite': suite, 'levels': ' '.join(map(str, levels)), 'seed': seed, 'checks': checks,
                'max_error': max_error, 'status': 'pass'}

    def write_replay(self, suite: str, seed: int, levels: Sequence[int], detail: str) -> Path:
        folder = self.log_dir / 'replay'
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"{suite}_{'x'.join(map(str, levels))}_{seed}.json"
        path.write_text(json.dumps({'suite': suite, 'seed': seed, 'levels': list(levels), 'detail': detail},
                                   indent=1) + '\n', encoding='utf-8')
        return path

    def replay(self, path) -> dict:
        """Re-runs the instance stored in a replay artifact; raises IdentityError if it still fails."""
        artifact = json.loads(Path(path).read_text(encoding='utf-8'))
        if artifact.get('suite') not in SUITES:
            raise ValueError(f"Unsupported verification suite in {path}: {artifact.get('suite')}")
        row = self.run_suite(artifact['suite'], artifact['levels'], int(artifact['seed']))
        self.df = None
        return row

    @staticmethod
    def expect(error: float, tolerance: float, what: str):
        if not error <= tolerance:
            raise IdentityError(f'{what}: error {error:.3e} exceeds {tolerance:.0e}')

    @staticmethod
    def random_function(grid: MultiGrid, seed: int, tag: str) -> GridFunction:
        return GridFunction(grid, SplitMix64(derive_seed(seed, tag)).normal(grid.total_cells).reshape(grid.shape))

    def suite_orthonormality(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """Gram matrix of {1} and all Haar functions along each axis is the identity."""
        checks, worst = 0, 0.0
        for axis in range(grid.m):
            depth = grid.levels[axis]
            basis = [np.ones(2 ** depth)]
            basis += [haar_vector(depth, interval) for interval in grid.all_intervals(axis, depth - 1)]
            basis = np.stack(basis)
            gram = basis @ basis.T / 2 ** depth
            error = float(np.max(np.abs(gram - np.eye(len(basis)))))
            self.expect(error, ORTHONORMALITY_TOLERANCE, f'Haar Gram matrix on axis {axis}')
            checks += 1
            worst = max(worst, error)
        return checks, worst

    def suite_parseval(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """Transform round trip, Parseval identity and the L^2 square-function identity."""
        f = self.random_function(grid, seed, 'f')
        coefficients = haar_transform(f)
        round_trip = _relative_error(inverse_haar_transform(coefficients), f)
        self.expect(round_trip, ROUND_TRIP_TOLERANCE, 'Haar round trip')

        energy = lp_norm(f, 2.0) ** 2
        parseval = abs(float(np.sum(coefficients.data ** 2)) - energy) / energy
        self.expect(parseval, ROUND_TRIP_TOLERANCE, 'Parseval identity')

        mean_zero = f
        for axis in range(grid.m):
            mean_zero = mean_zero - GridFunction(grid, np.broadcast_to(
                mean_zero.data.mean(axis=axis, keepdims=True), grid.shape).copy())
        _, s_norm = square_function(mean_zero, range(grid.m))
        f_norm = lp_norm(mean_zero, 2.0)
        square = abs(s_norm - f_norm) / max(f_norm, 1e-300)
        self.expect(square, 1e-12, 'square function L^2 identity')
        return 3, max(round_trip, parseval, square)

    def suite_decomposition(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """f = top + sum of martingale differences along each axis, and the same through blocks."""
        f = self.random_function(grid, seed, 'f')
        checks, worst = 0, 0.0
        for axis in range(grid.m):
            top = GridFunction(grid, np.broadcast_to(f.data.mean(axis=axis, keepdims=True), grid.shape).copy())
            differences = [martingale_diff(f, DyadicRectangle.of(interval))
                           for interval in grid.all_intervals(axis, grid.levels[axis] - 1)]
            error = _relative_error(top + _total(differences), f)
            self.expect(error, DECOMPOSITION_TOLERANCE, f'martingale decomposition on axis {axis}')

            whole = DyadicRectangle.whole([axis])
            blocks = [martingale_block(f, whole, [k]) for k in range(grid.levels[axis])]
            block_error = _relative_error(top + _total(blocks), f)
            self.expect(block_error, DECOMPOSITION_TOLERANCE, f'martingale blocks on axis {axis}')
            checks += 2
            worst = max(worst, error, block_error)
        return checks, worst

    def telescoping_triples(self, grid: MultiGrid, seed: int):
        per_axis = []
        for axis in range(grid.m):
            intervals = list(grid.all_intervals(axis))
            per_axis.append([(k, i, j) for k in intervals for i in intervals if k.contains(i)
                             for j in intervals if k.contains(j)])
        total = int(np.prod([len(triples) for triples in per_axis]))
        if total <= self.telescoping_cap:
            yield from product(*per_axis)
            return
        rng = SplitMix64(derive_seed(seed, 'telescoping'))
        picks = [rng.integers(self.telescoping_cap, len(triples)) for triples in per_axis]
        for row in range(self.telescoping_cap):
            yield tuple(triples[int(pick[row])] for triples, pick in zip(per_axis, picks))

    def suite_telescoping(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """<phi>_J - <phi>_I equals the sum of its telescoping terms under every common ancestor K."""
        phi = self.random_function(grid, seed, 'phi')
        checks, worst = 0, 0.0
        for combo in self.telescoping_triples(grid, seed):
            rect_k = DyadicRectangle(tuple(triple[0] for triple in combo))
            rect_i = DyadicRectangle(tuple(triple[1] for triple in combo))
            rect_j = DyadicRectangle(tuple(triple[2] for triple in combo))
            expected = float(phi.data[rect_j.index(grid)].mean() - phi.data[rect_i.index(grid)].mean())
            error = abs(sum(telescoping_terms(phi, rect_i, rect_j, rect_k)) - expected)
            self.expect(error, TELESCOPING_TOLERANCE, f'telescoping I={rect_i} J={rect_j} K={rect_k}')
            checks += 1
            worst = max(worst, error)
        return checks, worst

    def suite_product_expansion(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """Composed paraproducts plus top corrections rebuild b f, over all axes and over axis 0."""
        b = self.random_function(grid, seed, 'b')
        f = self.random_function(grid, seed, 'f')
        worst = 0.0
        subsets = [tuple(range(grid.m))] + ([(0,)] if grid.m > 1 else [])
        for v in subsets:
            terms = product_expansion(b, f, v)
            error = _relative_error(_total([term.value for term in terms]), b * f)
            self.expect(error, PRODUCT_TOLERANCE, f'product expansion over axes {v}')
            worst = max(worst, error)
        return len(subsets), worst

    def shift_partitions(self, m: int) -> List[List[Tuple[int, ...]]]:
        """Operator blocks for k = 1, 2, 3 shifts on an m-parameter grid."""
        axes = tuple(range(m))
        partitions = [[axes]]
        if m >= 2:
            partitions.append([axes[:1], axes[1:]])
        if m >= 3:
            partitions.append([(axis,) for axis in axes[:2]] + [axes[2:]])
        return partitions

    def check_commutator(self, spec: CommutatorSpec, f: GridFunction, what: str) -> Tuple[float, list]:
        direct = commutator_apply(spec, f)
        terms = commutator_expand(spec, f)
        error = (_total([term.value for term in terms]) - direct).max_abs()
        scale = max(direct.max_abs(), spec.symbol.max_abs() * f.max_abs())
        error = error / scale
        self.expect(error, COMMUTATOR_TOLERANCE, f'{what}: expansion sum')
        groups = {term.group for term in terms if not term.correction_axes}
        if len(groups) != 3 ** spec.grid.m:
            raise IdentityError(f"{what}: {len(groups)} paraproduct groups, expected {3 ** spec.grid.m}")
        return error, terms

    def suite_commutator_expansion(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """
        Shift commutators with k = 1, 2, 3: the expansion sums to the commutator, the general terms
        have the expected shape, and the illegal group matches both regroupings.
        """
        b = self.random_function(grid, seed, 'b')
        f = self.random_function(grid, seed, 'f')
        rng = SplitMix64(derive_seed(seed, 'complexity'))
        checks, worst = 0, 0.0
        for blocks in self.shift_partitions(grid.m):
            operators = []
            for position, block in enumerate(blocks):
                complexity = [[int(c) for c in rng.integers(2, min(grid.levels[axis], 2))] for axis in block]
                operators.append(gen_shift(derive_seed(seed, 'shift', position), grid, block, complexity))
            spec = CommutatorSpec(operators, b)
            what = f'k={spec.k} shifts on {blocks}'
            error, terms = self.check_commutator(spec, f, what)

            offenders = check_general_terms(terms)
            if offenders:
                raise IdentityError(f'{what}: terms without the general shape: {offenders[:5]}')

            illegal = illegal_group(terms)
            regroup_error = (regroup_illegal(spec, f) - illegal).max_abs() / max(illegal.max_abs(), 1.0)
            self.expect(regroup_error, COMMUTATOR_TOLERANCE, f'{what}: illegal regrouping')

            k_index, i_index, j_index, _ = shift_combinations(spec)
            count = k_index.shape[0]
            rows = SplitMix64(derive_seed(seed, 'rows', spec.k)).integers(min(count, 64), count) if count else []
            brackets = average_brackets(spec, i_index, j_index)
            bracket_error = 0.0
            for row in rows:
                telescoped = sum(telescoped_bracket(spec, k_index[row], i_index[row], j_index[row]))
                bracket_error = max(bracket_error, abs(telescoped - brackets[row]))
            self.expect(bracket_error, TELESCOPING_TOLERANCE, f'{what}: telescoped average brackets')
            checks += 4
            worst = max(worst, error, regroup_error, bracket_error)
        return checks, worst

    def mixed_operators(self, grid: MultiGrid, seed: int) -> List[List]:
        """Paraproduct-bearing two-axis operators next to a shift (m = 3) or to each other (m = 4)."""
        depth = min(grid.levels)
        complexity = [min(1, depth - 1), 0]
        pairs = []
        if grid.m == 3:
            shift = gen_shift(derive_seed(seed, 'shift'), grid, (2,), [[min(1, depth - 1)] * 2])
            pairs.append([gen_partial(derive_seed(seed, 'partial'), grid, (0, 1), complexity), shift])
            pairs.append([gen_partial(derive_seed(seed, 'partial'), grid, (1, 0), complexity, adjoint=True), shift])
            for flavor in ('none', 'full', 'partial_1', 'partial_2'):
                pairs.append([gen_full(derive_seed(seed, 'full', flavor), grid, (0, 1), flavor=flavor), shift])
        elif grid.m >= 4:
            pairs.append([gen_partial(derive_seed(seed, 'partial'), grid, (0, 1), complexity),
                          gen_full(derive_seed(seed, 'full'), grid, (2, 3), flavor='partial_1')])
            pairs.append([gen_full(derive_seed(seed, 'full'), grid, (0, 1), flavor='none'),
                          gen_partial(derive_seed(seed, 'partial'), grid, (3, 2), complexity, adjoint=True)])
        return pairs

    def suite_commutator_mixed(self, grid: MultiGrid, seed: int) -> Tuple[int, float]:
        """k = 2 commutators of paraproduct-bearing operators: the expansion sums to the commutator."""
        b = self.random_function(grid, seed, 'b')
        f = self.random_function(grid, seed, 'f')
        checks, worst = 0, 0.0
        for operators in self.mixed_operators(grid, seed):
            spec = CommutatorSpec(operators, b)
            error, _ = self.check_commutator(spec, f, " and ".join(repr(operator) for operator in operators))
            checks += 1
            worst = max(worst, error)
        return checks, worst

    def handle_outputs(self):
        if self.kwargs.get('out') or self.config.output:
            self.write_csv()
        return 'skipped'
