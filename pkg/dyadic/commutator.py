"""
Iterated commutators [T_1, [T_2, ... [b, T_k]]] of model operators on disjoint axis blocks.

Expanding the nested brackets gives 2^k words. In each word every operator sits either on
the left of the multiplication by b (side ``L``) or on the right (side ``R``, applied to f
first); operators on disjoint blocks commute, so a word is

    sign * L_ops( b * R_ops(f) ),    sign = (-1)^([T_k on L] + #{j < k : T_j on R}).

The expansion engine splits every product b * g further into composed paraproducts over all
axes, which is where the grouping by paraproduct flavor comes from.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dyadic.bmo import Partition, little_product_bmo_norm
from dyadic.errors import DyadicError
from dyadic.grid import DyadicInterval, DyadicRectangle, GridFunction, lp_norm
from dyadic.haar import analyse, synthesise, telescoping_terms
from dyadic.paraproducts import CORRECTION, FLAVORS, ILLEGAL, analyse_pair, synthesise_flavors
from dyadic.weights import Weight, ap_constant, bloom_weight

ZERO_TOLERANCE = 1e-12
REGROUP_LIMIT = 2 ** 20


class CommutatorSpec:
    """
    Operators T_1..T_k on pairwise disjoint axis blocks together with the symbol b.

    :param operators: The operators, outermost first.
    :param symbol: The symbol b.
    :param partition: Optional partition; it must consist of exactly the operator axis blocks.
    """

    def __init__(self, operators: Sequence, symbol: GridFunction, partition: Optional[Partition] = None):
        if not operators:
            raise DyadicError('a commutator needs at least one operator')
        self.operators = list(operators)
        self.symbol = symbol
        self.grid = symbol.grid
        seen = set()
        for operator in self.operators:
            if operator.grid != self.grid:
                raise DyadicError(f'operator grid {operator.grid.levels} does not match symbol grid {self.grid.levels}')
            overlap = seen & set(operator.axes)
            if overlap:
                raise DyadicError(f'axis overlap between operators on axes {sorted(overlap)}')
            seen |= set(operator.axes)
            if not operator.paraproduct_free and len(operator.axes) > 2:
                raise DyadicError(f'paraproduct-bearing operators may span at most two axes, got {operator.axes}')
        blocks = tuple(tuple(sorted(operator.axes)) for operator in self.operators)
        derived = Partition(blocks, self.grid.m)
        if partition is not None and sorted(map(sorted, partition.blocks)) != sorted(map(list, blocks)):
            raise DyadicError(f'partition {partition.blocks} does not match the operator blocks {blocks}')
        self.partition = derived

    @property
    def k(self) -> int:
        return len(self.operators)

    @property
    def paraproduct_free(self) -> bool:
        return all(operator.paraproduct_free for operator in self.operators)

    def with_symbol(self, symbol: GridFunction) -> 'CommutatorSpec':
        return CommutatorSpec(self.operators, symbol)


def word_sign(sides: str) -> float:
    """Sign of a side word such as ``'LR'`` (entry j is the side of T_(j+1))."""
    k = len(sides)
    flips = (sides[-1] == 'L') + sum(side == 'R' for side in sides[:-1])
    return -1.0 if flips % 2 else 1.0


def side_words(k: int) -> List[str]:
    return [''.join(word) for word in product('LR', repeat=k)]


def _compose(operators: Sequence, f: GridFunction) -> GridFunction:
    for operator in reversed(list(operators)):
        f = operator.apply(f)
    return f


def apply_word(spec: CommutatorSpec, sides: str, f: GridFunction,
               middle: Callable[[GridFunction], GridFunction] = None) -> GridFunction:
    """sign * L_ops(middle(R_ops f)); ``middle`` defaults to multiplication by b."""
    left = [operator for operator, side in zip(spec.operators, sides) if side == 'L']
    right = [operator for operator, side in zip(spec.operators, sides) if side == 'R']
    inner = _compose(right, f)
    inner = spec.symbol * inner if middle is None else middle(inner)
    return _compose(left, inner) * word_sign(sides)


def commutator_apply(spec: CommutatorSpec, f: GridFunction) -> GridFunction:
    """
    [T_1, [T_2, ... [b, T_k]]] f by the nested definition: the innermost bracket is
    b T_k f - T_k(b f), each outer one T_j C - C T_j.
    """
    if f.grid != spec.grid:
        raise DyadicError(f'function grid {f.grid.levels} does not match commutator grid {spec.grid.levels}')

    def nested(position: int, g: GridFunction) -> GridFunction:
        operator = spec.operators[position]
        if position == spec.k - 1:
            return spec.symbol * operator.apply(g) - operator.apply(spec.symbol * g)
        return operator.apply(nested(position + 1, g)) - nested(position + 1, operator.apply(g))

    return nested(0, f)


@dataclass(frozen=True, eq=False)
class ExpansionTerm:
    """
    One term of the commutator expansion.

    :param sides: Side word, one ``L``/``R`` per operator.
    :param flavors: Paraproduct flavor per grid axis (0 marks the top correction).
    :param producer: Closure mapping f to the term.
    :param value: The term evaluated at the f the expansion was computed for.
    """
    sides: str
    flavors: Tuple[int, ...]
    blocks: Tuple[Tuple[int, ...], ...]
    producer: Callable[[GridFunction], GridFunction] = field(repr=False)
    value: Optional[GridFunction] = field(default=None, repr=False)

    @property
    def correction_axes(self) -> Tuple[int, ...]:
        return tuple(axis for axis, flavor in enumerate(self.flavors) if flavor == CORRECTION)

    @property
    def group(self) -> str:
        """Label without the side word: terms sharing it are grouped together."""
        parts = [f'block{j}:' + ''.join(str(self.flavors[axis]) for axis in block)
                 for j, block in enumerate(self.blocks)]
        return '|'.join(parts)

    @property
    def label(self) -> str:
        corrections = ','.join(str(axis) for axis in self.correction_axes) or '-'
        return f'{self.group}|side:{self.sides}|corr:{corrections}'

    @property
    def illegal(self) -> bool:
        return all(flavor == ILLEGAL for flavor in self.flavors)

    @property
    def cancellative_symbol(self) -> bool:
        """b enters through a Haar coefficient on some axis (flavor 1 or 2)."""
        return any(flavor in (1, 2) for flavor in self.flavors)


def expansion_terms(spec: CommutatorSpec) -> List[ExpansionTerm]:
    """Every (side word, flavor tuple) term as a closure, without evaluating it."""
    axes = tuple(range(spec.grid.m))
    blocks = tuple(tuple(sorted(operator.axes)) for operator in spec.operators)
    terms = []
    for sides in side_words(spec.k):
        for flavors in product(sorted(FLAVORS), repeat=spec.grid.m):

            def middle(g: GridFunction, flavors=flavors) -> GridFunction:
                packed = analyse_pair(spec.symbol.data, g.data, axes, flavors)
                return GridFunction(spec.grid, synthesise_flavors(packed, axes, flavors))

            def producer(f: GridFunction, sides=sides, middle=middle) -> GridFunction:
                return apply_word(spec, sides, f, middle)

            terms.append(ExpansionTerm(sides, flavors, blocks, producer))
    return terms


def commutator_expand(spec: CommutatorSpec, f: GridFunction) -> List[ExpansionTerm]:
    """
    Expands the commutator into 2^k * 4^m labelled terms whose values sum to commutator_apply.

    The 3^m flavor groups without a correction axis are the composed paraproduct groups; the
    rest carry the top-average corrections of the finite domain.
    """
    return [ExpansionTerm(term.sides, term.flavors, term.blocks, term.producer, term.producer(f))
            for term in expansion_terms(spec)]


def group_values(terms: Sequence[ExpansionTerm]) -> Dict[str, GridFunction]:
    """Sums evaluated terms per group label (side words merged)."""
    groups: Dict[str, GridFunction] = {}
    for term in terms:
        groups[term.group] = term.value if term.group not in groups else groups[term.group] + term.value
    return groups


def check_general_terms(terms: Sequence[ExpansionTerm]) -> List[str]:
    """
    Structural check of the paraproduct-free expansion.

    Every group without a correction axis must either pair b with a cancellative Haar
    coefficient on some axis or be the fully illegal group, which is handled by regrouping.

    :return: Labels of groups violating the pattern (empty when the expansion is well formed).
    """
    offenders = []
    for term in terms:
        if term.correction_axes:
            continue
        if not (term.cancellative_symbol or term.illegal):
            offenders.append(term.label)
    return sorted(set(offenders))


def shift_combinations(spec: CommutatorSpec):
    """Full-axis index arrays (K, I, J) and products of coefficients over one entry per shift."""
    m = spec.grid.m
    sizes = [operator.nnz for operator in spec.operators]
    total = int(np.prod(sizes))
    if total > REGROUP_LIMIT:
        raise DyadicError(f'{total} coefficient combinations exceed the regrouping limit {REGROUP_LIMIT}')
    picks = [grid.reshape(-1) for grid in np.meshgrid(*(np.arange(n) for n in sizes), indexing='ij')]
    k_index = np.zeros((total, m), dtype=np.int64)
    i_index = np.zeros((total, m), dtype=np.int64)
    j_index = np.zeros((total, m), dtype=np.int64)
    coefficient = np.ones(total)
    for operator, pick in zip(spec.operators, picks):
        for column, axis in enumerate(operator.axes):
            k_index[:, axis] = operator.k_index[pick, column]
            i_index[:, axis] = operator.i_index[pick, column]
            j_index[:, axis] = operator.j_index[pick, column]
        coefficient = coefficient * operator.values[pick]
    return k_index, i_index, j_index, coefficient


def _bracket_rectangles(spec: CommutatorSpec, sides: str, i_index: np.ndarray, j_index: np.ndarray) -> np.ndarray:
    rect = i_index.copy()
    for operator, side in zip(spec.operators, sides):
        if side == 'R':
            rect[:, list(operator.axes)] = j_index[:, list(operator.axes)]
    return rect


def average_brackets(spec: CommutatorSpec, i_index: np.ndarray, j_index: np.ndarray) -> np.ndarray:
    """
    Sum over side words of sign * <b>_Q, with Q taking J on R-side blocks and I on L-side blocks.

    For k = 2 this is <b>_{I_u x J_v} - <b>_{I_u x I_v} - <b>_{J_u x J_v} + <b>_{J_u x I_v}.
    """
    averages = spec.symbol.data
    for axis in range(spec.grid.m):
        averages = analyse(averages, axis, 'avg')
    bracket = np.zeros(i_index.shape[0])
    for sides in side_words(spec.k):
        rect = _bracket_rectangles(spec, sides, i_index, j_index)
        bracket += word_sign(sides) * averages[tuple(rect.T)]
    return bracket


def regroup_illegal(spec: CommutatorSpec, f: GridFunction) -> GridFunction:
    """
    The fully illegal group of a shift commutator written as

        sum a_1 ... a_k <f, h_I> h_J * (sum of signed averages of b),

    one term per choice of a coefficient from every shift. Equals the sum of the illegal
    expansion terms over all side words.
    """
    if not spec.paraproduct_free:
        raise DyadicError('illegal regrouping is defined for shift commutators only')
    _, i_index, j_index, coefficient = shift_combinations(spec)
    f_coefficients = f.data
    for axis in range(spec.grid.m):
        f_coefficients = analyse(f_coefficients, axis, 'haar')
    out = np.zeros(spec.grid.shape)
    if coefficient.size:
        contribution = coefficient * f_coefficients[tuple(i_index.T)] * average_brackets(spec, i_index, j_index)
        np.add.at(out, tuple(j_index.T), contribution)
    for axis in range(spec.grid.m):
        out = synthesise(out, axis, 'haar')
    return GridFunction(spec.grid, out)


def _rectangle(packed: Sequence[int], axes: Sequence[int]) -> DyadicRectangle:
    return DyadicRectangle(tuple(DyadicInterval.from_packed(axis, int(packed[axis])) for axis in axes))


def telescoped_bracket(spec: CommutatorSpec, k_row: np.ndarray, i_row: np.ndarray, j_row: np.ndarray) -> List[float]:
    """
    The average bracket of one coefficient combination as telescoping terms along the first block.

    Side words are paired on the first operator; each pair is a difference of averages
    <b>_{J_1 x X} - <b>_{I_1 x X} over a common rectangle X on the other blocks, expanded into
    averaged martingale differences along the first block.
    """
    axes = tuple(range(spec.grid.m))
    first = list(spec.operators[0].axes)
    terms = []
    for rest in product('LR', repeat=spec.k - 1):
        sides = 'R' + ''.join(rest)
        outer = _bracket_rectangles(spec, sides, i_row[None, :], j_row[None, :])[0]
        lower, upper, ancestor = outer.copy(), outer.copy(), outer.copy()
        lower[first] = i_row[first]
        upper[first] = j_row[first]
        ancestor[first] = k_row[first]
        sign = word_sign(sides)
        terms.extend(sign * term for term in telescoping_terms(spec.symbol, _rectangle(lower, axes),
                                                               _rectangle(upper, axes), _rectangle(ancestor, axes)))
    return terms


def telescoped_illegal(spec: CommutatorSpec, f: GridFunction, sample: Optional[np.ndarray] = None) -> GridFunction:
    """
    The fully illegal group rebuilt from telescoping terms.

    :param sample: Optional indices of the coefficient combinations to include; all by default.
    """
    if not spec.paraproduct_free:
        raise DyadicError('illegal regrouping is defined for shift commutators only')
    k_index, i_index, j_index, coefficient = shift_combinations(spec)
    f_coefficients = f.data
    for axis in range(spec.grid.m):
        f_coefficients = analyse(f_coefficients, axis, 'haar')
    rows = np.arange(coefficient.size) if sample is None else np.asarray(sample, dtype=np.int64)
    out = np.zeros(spec.grid.shape)
    for row in rows:
        bracket = sum(telescoped_bracket(spec, k_index[row], i_index[row], j_index[row]))
        out[tuple(j_index[row])] += coefficient[row] * f_coefficients[tuple(i_index[row])] * bracket
    for axis in range(spec.grid.m):
        out = synthesise(out, axis, 'haar')
    return GridFunction(spec.grid, out)


def illegal_group(terms: Sequence[ExpansionTerm]) -> GridFunction:
    """Sum of the fully illegal terms over all side words."""
    values = [term.value for term in terms if term.illegal]
    total = values[0]
    for value in values[1:]:
        total = total + value
    return total


@dataclass(frozen=True)
class BloomRecord:
    numerator: float
    f_norm: float
    bmo: float
    mu_ap: float
    lambda_ap: float
    nu_a2: float
    ratio: float
    flagged: bool

    def to_dict(self) -> dict:
        return {
            'numerator': self.numerator,
            'f_norm': self.f_norm,
            'bmo': self.bmo,
            'mu_ap': self.mu_ap,
            'lambda_ap': self.lambda_ap,
            'nu_a2': self.nu_a2,
            'ratio': self.ratio,
            'flagged': self.flagged,
        }


def weight_constants(mu: Weight, lam: Weight, p: float) -> Tuple[float, float, float]:
    """([mu]_{A_p}, [lambda]_{A_p}, [nu]_{A_2}) for the Bloom weight nu."""
    nu = bloom_weight(mu, lam, p)
    return ap_constant(mu, p), ap_constant(lam, p), ap_constant(nu, 2.0)


def bloom_ratio(spec: CommutatorSpec, mu: Weight, lam: Weight, p: float, f: GridFunction,
                constants: Optional[Tuple[float, float, float]] = None) -> BloomRecord:
    """
    ||C f||_{L^p(lambda)} / (||b||_{bmo^P(nu)} ||f||_{L^p(mu)}) with nu the Bloom weight.

    An output below ``ZERO_TOLERANCE`` relative to ||b||_inf ||f||_inf counts as zero and gives
    ratio 0. A zero BMO norm with a nonzero output gives an infinite, flagged ratio.

    :param constants: Precomputed weight constants, see ``weight_constants``.
    """
    if not np.any(f.data):
        raise DyadicError('trivial test function: f vanishes identically')
    nu = bloom_weight(mu, lam, p)
    output = commutator_apply(spec, f)
    numerator = lp_norm(output, p, lam)
    f_norm = lp_norm(f, p, mu)
    bmo = little_product_bmo_norm(spec.symbol, nu, spec.partition)
    mu_ap, lambda_ap, nu_a2 = constants if constants is not None else weight_constants(mu, lam, p)

    scale = spec.symbol.max_abs() * f.max_abs()
    numerator_vanishes = output.max_abs() <= ZERO_TOLERANCE * max(scale, np.finfo(float).tiny)
    flagged = False
    if numerator_vanishes:
        ratio = 0.0
    elif bmo == 0.0:
        ratio = float('inf')
        flagged = True
    else:
        ratio = numerator / (bmo * f_norm)
    return BloomRecord(numerator, f_norm, bmo, mu_ap, lambda_ap, nu_a2, ratio, flagged)
