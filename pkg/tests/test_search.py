import numpy as np
import pytest

from conftest import random_function
from dyadic.commutator import CommutatorSpec
from dyadic.errors import DyadicError
from dyadic.search import worst_case_search
from dyadic.weights import Weight, gen_ap_weight
from operators import gen_shift


@pytest.fixture
def template(grid_2d):
    operators = [gen_shift(1, grid_2d, [0], [[1, 1]]), gen_shift(2, grid_2d, [1], [[1, 0]])]
    return CommutatorSpec(operators, random_function(grid_2d, 3))


def test_search_never_loses_ground(template, grid_2d):
    mu = gen_ap_weight(4, grid_2d, 0.3)
    lam = gen_ap_weight(5, grid_2d, 0.3)
    result = worst_case_search(template, mu, lam, 2.0, 6, seed=9)
    assert len(result.trajectory) == 7
    assert all(later >= earlier for earlier, later in zip(result.trajectory, result.trajectory[1:]))
    assert result.best.ratio == result.trajectory[-1]
    assert result.symbol.grid == grid_2d
    assert result.function.grid == grid_2d


def test_search_is_seeded(template, grid_2d):
    mu = lam = Weight.constant(grid_2d)
    f = random_function(grid_2d, 8)
    first = worst_case_search(template, mu, lam, 2.0, 4, seed=1, f=f)
    second = worst_case_search(template, mu, lam, 2.0, 4, seed=1, f=f)
    assert first.trajectory == second.trajectory
    np.testing.assert_array_equal(first.symbol.data, second.symbol.data)


def test_search_needs_a_budget(template, grid_2d):
    mu = lam = Weight.constant(grid_2d)
    with pytest.raises(DyadicError, match='budget'):
        worst_case_search(template, mu, lam, 2.0, 0, seed=1)
