import numpy as np
import pytest

from conftest import random_function
from dyadic.errors import WeightError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.weights import Weight, ainf_constant, ap_constant, bloom_weight, gen_ap_weight, slice_ap_constant


@pytest.fixture
def two_cell_weight():
    return Weight.from_array(MultiGrid((1,)), np.array([1.0, 3.0]))


def test_weight_must_be_positive():
    with pytest.raises(WeightError, match='not a weight'):
        Weight.from_array(MultiGrid((1,)), np.array([1.0, 0.0]))
    with pytest.raises(WeightError):
        Weight.from_array(MultiGrid((1,)), np.array([1.0, -2.0]))


def test_ap_constant_of_two_cells(two_cell_weight):
    # whole interval: <w> = 2, <w^-1> = 2/3
    assert ap_constant(two_cell_weight, 2.0) == pytest.approx(4.0 / 3.0)


def test_ainf_constant_of_two_cells(two_cell_weight):
    assert ainf_constant(two_cell_weight, 0) == pytest.approx(2.0 / np.sqrt(3.0))


@pytest.mark.parametrize('p', [1.5, 2.0, 3.0])
def test_constant_weight_constants(grid_2d, p):
    w = Weight.constant(grid_2d, 5.0)
    assert ap_constant(w, p) == pytest.approx(1.0)
    assert slice_ap_constant(w, p, 1) == pytest.approx(1.0)
    assert ainf_constant(w, 0) == pytest.approx(1.0)


@pytest.mark.parametrize('p', [1.0, 0.5, float('inf')])
def test_ap_needs_exponent_above_one(grid_1d, p):
    with pytest.raises(WeightError, match='1 < p < inf'):
        ap_constant(Weight.constant(grid_1d), p)


def test_cascade_weight_properties(grid_2d):
    w = gen_ap_weight(17, grid_2d, 0.5)
    assert w.grid == grid_2d
    assert np.all(w.data > 0)
    np.testing.assert_array_equal(w.data, gen_ap_weight(17, grid_2d, 0.5).data)
    assert not np.array_equal(w.data, gen_ap_weight(18, grid_2d, 0.5).data)
    ap = ap_constant(w, 2.0)
    assert ap >= 1.0
    for axis in range(grid_2d.m):
        assert 1.0 <= slice_ap_constant(w, 2.0, axis) <= ap * (1 + 1e-12)
        assert ainf_constant(w, axis) >= 1.0


def test_cascade_weight_has_mean_one(grid_2d):
    # every split multiplies the children by 1 + e and 1 - e
    assert float(gen_ap_weight(3, grid_2d, 0.7).data.mean()) == pytest.approx(1.0)


def test_zero_roughness_is_constant(grid_3d):
    np.testing.assert_array_equal(gen_ap_weight(1, grid_3d, 0.0).data, np.ones(grid_3d.shape))


@pytest.mark.parametrize('roughness', [-0.1, 1.0, 2.0])
def test_invalid_roughness(grid_1d, roughness):
    with pytest.raises(WeightError, match='roughness'):
        gen_ap_weight(1, grid_1d, roughness)


def test_bloom_weight(grid_2d):
    mu = gen_ap_weight(1, grid_2d, 0.4)
    lam = gen_ap_weight(2, grid_2d, 0.4)
    nu = bloom_weight(mu, lam, 2.0)
    np.testing.assert_allclose(nu.data, np.sqrt(mu.data / lam.data))
    np.testing.assert_allclose(bloom_weight(mu, mu, 3.0).data, 1.0)


def test_bloom_weight_grid_mismatch(grid_1d, grid_2d):
    with pytest.raises(WeightError, match='different grids'):
        bloom_weight(Weight.constant(grid_1d), Weight.constant(grid_2d), 2.0)


def test_weight_measure(grid_2d):
    w = Weight(GridFunction(grid_2d, np.full(grid_2d.shape, 2.0)))
    assert w.measure((slice(0, 4), slice(None))) == pytest.approx(1.0)
    assert w.power(2.0).data.max() == 4.0


def test_random_function_is_not_a_weight(grid_2d):
    with pytest.raises(WeightError):
        Weight(random_function(grid_2d, 0))


@pytest.mark.parametrize('p', [1.5, 2.0, 3.0])
@pytest.mark.parametrize('seed', [1, 7, 42])
def test_ap_duality(p, seed):
    w = gen_ap_weight(seed, MultiGrid((3, 3)), 0.6)
    p_dual = p / (p - 1.0)
    sigma = w.power(-1.0 / (p - 1.0))
    assert ap_constant(sigma, p_dual) == pytest.approx(ap_constant(w, p) ** (p_dual - 1.0), rel=1e-10)
