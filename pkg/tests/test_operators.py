import numpy as np
import pytest

from conftest import random_function
from dyadic.bmo import product_bmo_norm
from dyadic.errors import AdmissibilityError, DyadicError, GridError
from dyadic.grid import DyadicInterval, DyadicRectangle, GridFunction, MultiGrid, inner_product
from dyadic.haar import haar_function
from operators import (build_operator, gen_full, gen_partial, gen_shift, load_operator, operator_from_dict,
                       save_operator)
from operators.full_paraproduct import FullParaproduct
from operators.model_operator import size_bound, triples
from operators.partial_paraproduct import PartialParaproduct
from operators.shift import Shift


def assert_adjoint(operator, grid, seeds=(1, 2)):
    f = random_function(grid, seeds[0])
    g = random_function(grid, seeds[1])
    left = inner_product(operator.apply(f), g)
    right = inner_product(f, operator.adjoint().apply(g))
    assert left == pytest.approx(right, rel=1e-11, abs=1e-12)


def test_triples_count():
    ks, is_, js = triples(3, 1, 1)
    assert len(ks) == 12
    assert np.all(is_ >> 1 == ks)
    assert np.all(js >> 1 == ks)


def test_triples_complexity_too_large():
    with pytest.raises(DyadicError, match='does not fit'):
        triples(2, 2, 0)


def test_size_bound():
    assert size_bound(np.array([1]), np.array([2]), np.array([3])) == pytest.approx(0.5)
    assert size_bound(np.array([[1, 1]]), np.array([[1, 2]]), np.array([[1, 3]]))[0] == pytest.approx(0.5)


def test_haar_multiplier_removes_the_mean(grid_1d):
    f = random_function(grid_1d, 3)
    multiplier = Shift.haar_multiplier(grid_1d, [0])
    assert multiplier.apply(f).allclose(f - f.data.mean(), atol=1e-13)


def test_generated_shift_saturates_the_bound(grid_1d):
    shift = gen_shift(5, grid_1d, [0], [[0, 0]])
    assert shift.nnz == 7
    np.testing.assert_allclose(np.abs(shift.values), 1.0)
    half = gen_shift(5, grid_1d, [0], [[0, 0]], theta=0.5)
    np.testing.assert_allclose(half.values, 0.5 * shift.values)


@pytest.mark.parametrize('axes, complexity', [([0], [[1, 0]]), ([1], [[1, 1]]), ([0, 1], [[1, 2], [0, 1]])])
def test_shift_adjoint(grid_2d, axes, complexity):
    assert_adjoint(gen_shift(11, grid_2d, axes, complexity), grid_2d)


def test_shift_rejects_oversized_coefficient(grid_1d):
    with pytest.raises(AdmissibilityError, match='inadmissible coefficient'):
        Shift(grid_1d, [0], [[0, 0]], [[1]], [[1]], [[1]], [2.0])


def test_shift_rejects_wrong_pattern(grid_1d):
    with pytest.raises(AdmissibilityError, match='I\\^\\(0\\) != K'):
        Shift(grid_1d, [0], [[0, 0]], [[1]], [[2]], [[1]], [0.1])


def test_shift_rejects_bad_theta(grid_1d):
    with pytest.raises(DyadicError, match='theta'):
        gen_shift(1, grid_1d, [0], [[0, 0]], theta=1.5)


def test_shift_checks_input_grid(grid_1d, grid_2d):
    with pytest.raises(GridError, match='does not match'):
        gen_shift(1, grid_1d, [0], [[0, 0]]).apply(random_function(grid_2d, 1))


def test_shift_acts_pointwise_on_other_axes(grid_2d):
    shift = gen_shift(3, grid_2d, [0], [[1, 1]])
    f = random_function(grid_2d, 7)
    out = shift.apply(f)
    for column in range(grid_2d.cells(1)):
        one_axis = gen_shift(3, MultiGrid((3,)), [0], [[1, 1]])
        expected = one_axis.apply(GridFunction(MultiGrid((3,)), f.data[:, column]))
        np.testing.assert_allclose(out.data[:, column], expected.data, atol=1e-13)


def test_partial_paraproduct_is_admissible(grid_2d):
    operator = gen_partial(4, grid_2d, [0, 1], [1, 0], theta=0.8)
    assert operator.shift_axis == 0
    assert operator.paraproduct_axis == 1
    assert not operator.paraproduct_free
    operator.validate()


@pytest.mark.parametrize('axes', [[0, 1], [1, 0]])
def test_partial_paraproduct_adjoint(grid_2d, axes):
    assert_adjoint(gen_partial(4, grid_2d, axes, [1, 0]), grid_2d)


def test_partial_paraproduct_rejects_large_sequence(grid_2d):
    operator = gen_partial(4, grid_2d, [0, 1], [1, 0])
    with pytest.raises(AdmissibilityError, match='BMO norm'):
        PartialParaproduct(grid_2d, [0, 1], [1, 0], operator.k_index, operator.i_index, operator.j_index,
                           operator.sequences * 2.0)


def test_full_paraproduct_symbol_norm(grid_2d):
    operator = gen_full(6, grid_2d, [0, 1], theta=0.5)
    assert product_bmo_norm(operator.symbol) == pytest.approx(0.5)


@pytest.mark.parametrize('flavor', ['none', 'full', 'partial_1', 'partial_2'])
@pytest.mark.parametrize('axes', [[0, 1], [1, 0]])
def test_full_paraproduct_adjoint(grid_2d, flavor, axes):
    assert_adjoint(gen_full(6, grid_2d, axes, flavor=flavor), grid_2d)


def test_full_paraproduct_validation(grid_2d):
    with pytest.raises(DyadicError, match='Unsupported full paraproduct flavor'):
        gen_full(6, grid_2d, [0, 1], flavor='half')
    with pytest.raises(DyadicError, match='symbol grid'):
        FullParaproduct(grid_2d, [0, 1], GridFunction.constant(MultiGrid((2, 2)), 0.0))


def test_full_paraproduct_rescales_large_symbols(grid_2d):
    symbol = random_function(MultiGrid((3, 2)), 9) * 50.0
    operator = FullParaproduct(grid_2d, [0, 1], symbol)
    assert product_bmo_norm(operator.symbol) == pytest.approx(1.0)


@pytest.mark.parametrize('template', [
    {'type': 'shift', 'axes': [1], 'complexity': [[1, 0]], 'theta': 0.7},
    {'type': 'partial', 'axes': [1, 0], 'complexity': [1, 1], 'adjoint': True},
    {'type': 'full', 'axes': [0, 1], 'flavor': 'partial_2'},
])
def test_save_and_load(tmp_path, grid_2d, template):
    operator = build_operator(template, grid_2d, 21)
    path = save_operator(operator, tmp_path / 'operators' / 'op.json')
    loaded = load_operator(path)
    assert type(loaded) is type(operator)
    assert loaded.axes == operator.axes
    f = random_function(grid_2d, 2)
    assert loaded.apply(f).allclose(operator.apply(f), rtol=1e-12, atol=1e-14)


def test_build_operator_from_path(tmp_path, grid_2d, grid_3d):
    path = save_operator(gen_shift(1, grid_2d, [0], [[0, 0]]), tmp_path / 'shift.json')
    assert build_operator({'path': str(path)}, grid_2d, 0).nnz == 7
    with pytest.raises(ValueError, match='is for grid'):
        build_operator({'path': str(path)}, grid_3d, 0)


def test_build_operator_errors(grid_2d):
    with pytest.raises(ValueError, match='Unsupported operator fields'):
        build_operator({'type': 'shift', 'axes': [0], 'colour': 'red'}, grid_2d, 0)
    with pytest.raises(ValueError, match='axes must be provided'):
        build_operator({'type': 'shift'}, grid_2d, 0)
    with pytest.raises(ValueError, match='Unsupported operator'):
        build_operator({'type': 'wavelet', 'axes': [0]}, grid_2d, 0)
    with pytest.raises(ValueError, match='Unsupported operator'):
        operator_from_dict({'type': 'wavelet'})


def test_build_operator_is_seeded(grid_2d):
    template = {'type': 'shift', 'axes': [0, 1], 'complexity': [[1, 1], [0, 1]]}
    first = build_operator(template, grid_2d, 5)
    np.testing.assert_array_equal(first.values, build_operator(template, grid_2d, 5).values)
    assert not np.array_equal(first.values, build_operator(template, grid_2d, 6).values)


def test_zero_theta_gives_the_zero_operator(grid_2d):
    f = random_function(grid_2d, 8)
    for operator in (gen_shift(3, grid_2d, [0, 1], [[1, 0], [0, 1]], theta=0.0),
                     gen_partial(3, grid_2d, [0, 1], [1, 0], theta=0.0),
                     gen_full(3, grid_2d, [0, 1], theta=0.0)):
        assert operator.apply(f).max_abs() == 0.0


def test_empty_shift_is_zero(grid_1d):
    assert Shift(grid_1d, [0], [[0, 0]]).apply(random_function(grid_1d, 2)).max_abs() == 0.0


def test_single_coefficient_shift(grid_1d):
    shift = Shift(grid_1d, [0], [[1, 1]], [[1]], [[2]], [[3]], [0.5])
    f = random_function(grid_1d, 13)
    h_i = haar_function(grid_1d, DyadicInterval(0, 1, 0))
    h_j = haar_function(grid_1d, DyadicInterval(0, 1, 1))
    assert shift.apply(f).allclose(h_j * (0.5 * inner_product(f, h_i)), atol=1e-13)


def test_rank_one_full_paraproduct(grid_2d):
    rectangle = DyadicRectangle.of(DyadicInterval(0, 1, 1), DyadicInterval(1, 0, 0))
    symbol = haar_function(grid_2d, rectangle) * np.sqrt(rectangle.measure)
    operator = FullParaproduct(grid_2d, [0, 1], symbol)
    f = random_function(grid_2d, 17)
    pairing = inner_product(f, haar_function(grid_2d, rectangle))
    expected = GridFunction.indicator(grid_2d, rectangle) * (np.sqrt(rectangle.measure) * pairing / rectangle.measure)
    assert operator.apply(f).allclose(expected, rtol=1e-9, atol=1e-12)
