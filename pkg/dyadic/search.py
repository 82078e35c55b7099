from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from dyadic.commutator import BloomRecord, CommutatorSpec, bloom_ratio, weight_constants
from dyadic.errors import DyadicError
from dyadic.grid import GridFunction
from dyadic.haar import HaarCoeffs, haar_transform, inverse_haar_transform
from dyadic.seeding import SplitMix64, derive_seed
from dyadic.weights import Weight

STEP_SIZES = (1.0, 0.25)


@dataclass
class SearchResult:
    best: BloomRecord
    symbol: GridFunction
    function: GridFunction
    trajectory: List[float] = field(default_factory=list)


def _normalised(coefficients: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.sum(coefficients ** 2))
    return coefficients / norm if norm > 0 else coefficients


def worst_case_search(template: CommutatorSpec, mu: Weight, lam: Weight, p: float, budget: int, seed: int,
                      f: Optional[GridFunction] = None) -> SearchResult:
    """
    Coordinate ascent on the Haar coefficients of b and f maximising the Bloom ratio.

    Iterations alternate between b (even) and f (odd). Each one picks a random Haar slot and
    tries the moves +-s * (largest coefficient) for every step size s, keeping the best finite
    ratio; coefficients are renormalised to unit l^2 norm after every accepted move.

    :param template: Commutator whose operators are kept; its symbol is the starting b.
    :param budget: Number of iterations, at least 1.
    :param seed: Seed of the slot choices and of the starting f when none is given.
    :param f: Optional starting test function.
    """
    if budget < 1:
        raise DyadicError(f'search budget must be at least 1, got {budget}')
    grid = template.grid
    rng = SplitMix64(derive_seed(seed, 'search'))
    if f is None:
        f = GridFunction(grid, SplitMix64(derive_seed(seed, 'function')).normal(grid.total_cells))
    constants = weight_constants(mu, lam, p)
    axes = tuple(range(grid.m))

    def evaluate(cb: np.ndarray, cf: np.ndarray) -> BloomRecord:
        b = inverse_haar_transform(HaarCoeffs(grid, cb, axes))
        g = inverse_haar_transform(HaarCoeffs(grid, cf, axes))
        return bloom_ratio(template.with_symbol(b), mu, lam, p, g, constants)

    coefficients = [haar_transform(template.symbol).data.copy(), _normalised(haar_transform(f).data.copy())]
    best = evaluate(*coefficients)
    trajectory = [best.ratio]
    for iteration in range(budget):
        target = iteration % 2
        slot = int(rng.integers(1, grid.total_cells - 1)[0]) + 1
        index = np.unravel_index(slot, grid.shape)
        scale = np.max(np.abs(coefficients[target])) or 1.0
        for step in STEP_SIZES:
            for direction in (1.0, -1.0):
                candidate = coefficients[target].copy()
                candidate[index] += direction * step * scale
                candidate = _normalised(candidate)
                trial = list(coefficients)
                trial[target] = candidate
                if not np.any(trial[1]):
                    continue
                record = evaluate(*trial)
                if np.isfinite(record.ratio) and record.ratio > best.ratio:
                    best = record
                    coefficients = trial
        trajectory.append(best.ratio)

    symbol = inverse_haar_transform(HaarCoeffs(grid, coefficients[0], axes))
    function = inverse_haar_transform(HaarCoeffs(grid, coefficients[1], axes))
    return SearchResult(best, symbol, function, trajectory)
