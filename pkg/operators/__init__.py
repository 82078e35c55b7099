"""
Model operators and their JSON description.

``OPERATOR_CLASSES`` maps the ``type`` field of an operator template or JSON file to the class
implementing it.
"""
import json
from pathlib import Path
from typing import Sequence, Union

from dyadic.grid import MultiGrid
from operators.full_paraproduct import FullParaproduct
from operators.model_operator import ModelOperator
from operators.partial_paraproduct import PartialParaproduct
from operators.shift import Shift

OPERATOR_CLASSES = {
    'shift': Shift,
    'partial': PartialParaproduct,
    'full': FullParaproduct,
}

TEMPLATE_FIELDS = {'type', 'axes', 'complexity', 'theta', 'flavor', 'adjoint', 'path', 'name'}


def gen_shift(seed: int, grid: MultiGrid, axes: Sequence[int], complexity: Sequence[Sequence[int]],
              theta: float = 1.0) -> Shift:
    return Shift.generate(seed, grid, axes, complexity, theta)


def gen_partial(seed: int, grid: MultiGrid, axes: Sequence[int], complexity: Sequence[int],
                theta: float = 1.0, adjoint: bool = False) -> PartialParaproduct:
    return PartialParaproduct.generate(seed, grid, axes, complexity, theta, adjoint)


def gen_full(seed: int, grid: MultiGrid, axes: Sequence[int], theta: float = 1.0,
             flavor: str = 'none') -> FullParaproduct:
    return FullParaproduct.generate(seed, grid, axes, theta, flavor)


def operator_from_dict(spec: dict) -> ModelOperator:
    operator_class = OPERATOR_CLASSES.get(spec.get('type'))
    if operator_class is None:
        raise ValueError(f"Unsupported operator: {spec.get('type')}")
    return operator_class.from_dict(spec)


def save_operator(operator: ModelOperator, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(operator.to_dict(), indent=1) + '\n', encoding='utf-8')
    return path


def load_operator(path: Union[str, Path]) -> ModelOperator:
    return operator_from_dict(json.loads(Path(path).read_text(encoding='utf-8')))


def build_operator(template: dict, grid: MultiGrid, seed: int) -> ModelOperator:
    """
    Instantiates an operator template.

    :param template: ``{type, axes, complexity, theta, flavor, adjoint, path, name}``; ``path``
        loads a stored operator instead of generating one.
    :param grid: Grid of the experiment.
    :param seed: Seed for generated operators.
    :return: The operator.
    """
    unknown = set(template) - TEMPLATE_FIELDS
    if unknown:
        raise ValueError(f'Unsupported operator fields: {sorted(unknown)}')
    if template.get('path'):
        operator = load_operator(template['path'])
        if operator.grid != grid:
            raise ValueError(f"operator file {template['path']} is for grid {operator.grid.levels}, not {grid.levels}")
        return operator

    kind = template.get('type')
    theta = float(template.get('theta', 1.0))
    axes = template.get('axes')
    if axes is None:
        raise ValueError('operator axes must be provided')
    if kind == 'shift':
        complexity = template.get('complexity', [[0, 0]] * len(axes))
        return gen_shift(seed, grid, axes, complexity, theta)
    if kind == 'partial':
        return gen_partial(seed, grid, axes, template.get('complexity', [0, 0]), theta, bool(template.get('adjoint', False)))
    if kind == 'full':
        return gen_full(seed, grid, axes, theta, template.get('flavor', 'none'))
    raise ValueError(f'Unsupported operator: {kind}')
