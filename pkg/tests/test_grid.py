import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_function
from dyadic.errors import GridError, WeightError
from dyadic.grid import (DyadicInterval, DyadicRectangle, GridFunction, MultiGrid, average, inner_product, lp_norm,
                         rectangle_averages)

levels_strategy = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=3)


def test_grid_shape_and_volume():
    grid = MultiGrid((3, 2))
    assert grid.m == 2
    assert grid.shape == (8, 4)
    assert grid.total_cells == 32
    assert grid.cell_volume == 1 / 32


@pytest.mark.parametrize('levels', [(), (0,), (13,), (12, 12, 1), (1,) * 7])
def test_invalid_grids(levels):
    with pytest.raises(GridError):
        MultiGrid(levels)


def test_intervals_tile_the_axis():
    grid = MultiGrid((3,))
    for level in range(4):
        intervals = grid.intervals(0, level)
        assert len(intervals) == 2 ** level
        assert sum(interval.measure for interval in intervals) == 1.0


def test_invalid_level():
    with pytest.raises(GridError, match='invalid level'):
        MultiGrid((2,)).intervals(0, 3)


def test_interval_ancestry():
    interval = DyadicInterval(0, 3, 5)
    assert interval.ancestor(1) == DyadicInterval(0, 2, 2)
    assert interval.ancestor(3) == DyadicInterval(0, 0, 0)
    assert DyadicInterval(0, 1, 1).contains(interval)
    assert not DyadicInterval(0, 1, 0).contains(interval)
    assert DyadicInterval(0, 1, 1).generations_above(interval) == 2
    assert DyadicInterval(0, 1, 0).generations_above(interval) is None
    assert DyadicInterval.from_packed(0, interval.packed_index) == interval


def test_children_and_descendants():
    interval = DyadicInterval(1, 1, 1)
    assert interval.children() == (DyadicInterval(1, 2, 2), DyadicInterval(1, 2, 3))
    assert interval.descendants(2) == [DyadicInterval(1, 3, pos) for pos in range(4, 8)]


def test_rectangle_counts():
    grid = MultiGrid((2, 1))
    assert len(list(grid.rectangles())) == 7 * 3
    assert len(list(grid.rectangles(cancellative=True))) == 3 * 1
    assert len(list(grid.rectangles(axes=[1]))) == 3


def test_rectangle_rejects_repeated_axis():
    with pytest.raises(GridError):
        DyadicRectangle.of(DyadicInterval(0, 1, 0), DyadicInterval(0, 2, 0))


def test_average_of_indicator():
    grid = MultiGrid((2, 2))
    rectangle = DyadicRectangle.of(DyadicInterval(0, 1, 0), DyadicInterval(1, 2, 3))
    f = GridFunction.indicator(grid, rectangle)
    assert average(f, rectangle) == 1.0
    assert average(f, DyadicRectangle.whole([0, 1])) == rectangle.measure


def test_partial_average_is_grid_function():
    grid = MultiGrid((2, 2))
    f = GridFunction(grid, np.arange(16.0))
    partial = average(f, DyadicRectangle.of(DyadicInterval(0, 0, 0)))
    assert partial.grid == MultiGrid((2,))
    np.testing.assert_allclose(partial.data, np.arange(16.0).reshape(4, 4).mean(axis=0))


def test_average_out_of_grid():
    with pytest.raises(GridError):
        average(GridFunction.constant(MultiGrid((2,)), 1.0), DyadicRectangle.of(DyadicInterval(0, 3, 0)))


def test_inner_product_full_and_partial():
    grid = MultiGrid((2, 1))
    f = random_function(grid, 1)
    g = random_function(grid, 2)
    assert inner_product(f, g) == pytest.approx(float(np.mean(f.data * g.data)))

    h = random_function(MultiGrid((1,)), 3)
    partial = inner_product(f, h, axes=[1])
    np.testing.assert_allclose(partial.data, (f.data * h.data[None, :]).mean(axis=1))


def test_lp_norm_of_constant_is_its_value():
    grid = MultiGrid((2, 2))
    assert lp_norm(GridFunction.constant(grid, -3.0), 2.0) == pytest.approx(3.0)
    assert lp_norm(GridFunction.constant(grid, 3.0), 1.5, GridFunction.constant(grid, 4.0)) == pytest.approx(
        3.0 * 4.0 ** (1 / 1.5))


def test_lp_norm_rejects_non_weight():
    grid = MultiGrid((1,))
    with pytest.raises(WeightError, match='not a weight'):
        lp_norm(GridFunction.constant(grid, 1.0), 2.0, GridFunction(grid, [1.0, 0.0]))


def test_grid_function_arithmetic_checks_grids():
    with pytest.raises(GridError):
        GridFunction.constant(MultiGrid((1,)), 1.0) + GridFunction.constant(MultiGrid((2,)), 1.0)


def test_grid_function_is_frozen():
    f = GridFunction.constant(MultiGrid((1,)), 1.0)
    with pytest.raises(ValueError):
        f.data[0] = 2.0


@given(levels=levels_strategy, seed=st.integers(min_value=0, max_value=2 ** 32))
@settings(deadline=None, max_examples=30)
def test_rectangle_averages_match_brute_force(levels, seed):
    grid = MultiGrid(tuple(levels))
    f = random_function(grid, seed)
    averages = dict(rectangle_averages(f.data, grid.levels, range(grid.m)))
    for rectangle in grid.rectangles():
        key = tuple(interval.level for interval in rectangle.intervals)
        position = tuple(interval.pos for interval in rectangle.intervals)
        assert averages[key][position] == pytest.approx(average(f, rectangle), rel=1e-12, abs=1e-14)
