from typing import Optional, Sequence, Tuple

import numpy as np

from dyadic.grid import GridFunction, lp_norm, rectangle_averages, refine
from dyadic.haar import analyse, param_subset, synthesise


def square_function(f: GridFunction, v: Sequence[int], w=None, p: float = 2.0) -> Tuple[GridFunction, float]:
    """
    Multi-parameter dyadic square function S^v f = (sum_R |Delta_R f|^2)^(1/2).

    R runs over rectangles that are cancellative on every axis of ``v``; the other axes are
    left pointwise.

    :return: ``(S^v f, ||S^v f||_{L^p(w)})``.
    """
    v = param_subset(v, f.grid.m)
    coefficients = f.data
    for axis in v:
        coefficients = analyse(coefficients, axis, 'haar')
    squares = coefficients ** 2
    for axis in v:
        squares = synthesise(squares, axis, 'square')
    s = GridFunction(f.grid, np.sqrt(np.maximum(squares, 0.0)))
    return s, lp_norm(s, p, w)


def maximal(f: GridFunction, v: Sequence[int]) -> GridFunction:
    """
    Strong dyadic maximal function M^v f: the largest <|f|>_R over dyadic rectangles R on ``v``
    containing the point, with the other axes frozen.
    """
    v = param_subset(v, f.grid.m)
    best = np.zeros(f.grid.shape)
    for _, averages in rectangle_averages(np.abs(f.data), f.grid.levels, v):
        for axis in v:
            averages = refine(averages, axis, f.grid.cells(axis))
        np.maximum(best, averages, out=best)
    return GridFunction(f.grid, best)


def fefferman_stein_ratio(functions: Sequence[GridFunction], v: Sequence[int], w=None,
                          p: float = 2.0, q: float = 2.0) -> float:
    """
    ||(sum_j (M^v f_j)^q)^(1/q)||_{L^p(w)} / ||(sum_j |f_j|^q)^(1/q)||_{L^p(w)}.
    """
    grid = functions[0].grid
    numerator = sum(maximal(f, v).data ** q for f in functions) ** (1.0 / q)
    denominator = sum(np.abs(f.data) ** q for f in functions) ** (1.0 / q)
    bottom = lp_norm(GridFunction(grid, denominator), p, w)
    if bottom == 0.0:
        return 0.0
    return lp_norm(GridFunction(grid, numerator), p, w) / bottom


def square_function_ratio(f: GridFunction, v: Sequence[int], w=None, p: float = 2.0) -> Optional[float]:
    """||f||_{L^p(w)} / ||S^v f||_{L^p(w)}; None when the square function vanishes."""
    _, s_norm = square_function(f, v, w, p)
    if s_norm == 0.0:
        return None
    return lp_norm(f, p, w) / s_norm
