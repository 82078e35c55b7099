import json

import pytest
import yaml

from config import ConfigError, ExperimentConfig

BASE = {
    'version': 1,
    'experiment': 'commutator',
    'grid': {'levels': [3, 2]},
    'seed': 10,
    'ensemble': 3,
    'operators': [
        {'type': 'shift', 'axes': [0], 'complexity': [[1, 1]]},
        {'type': 'shift', 'axes': [1], 'complexity': [[1, 0]]},
    ],
}


def document(**changes):
    doc = json.loads(json.dumps(BASE))
    doc.update(changes)
    return doc


def test_valid_config():
    config = ExperimentConfig.from_dict(document())
    assert config.grid.levels == (3, 2)
    assert config.p == 2.0
    assert config.fixture == 'check'
    assert config.instance_seeds() == [10, 11, 12]
    assert config.telescoping_cap == 4096
    assert config.to_dict() == document()


@pytest.mark.parametrize('changes, field', [
    ({'colour': 'red'}, 'colour'),
    ({'version': 2}, 'version'),
    ({'experiment': 'dance'}, 'experiment'),
    ({'grid': {'levels': [0, 2]}}, 'grid.levels'),
    ({'grid': {'levels': [3, 2], 'depth': 4}}, 'grid.depth'),
    ({'p': 1}, 'p'),
    ({'seed': -1}, 'seed'),
    ({'ensemble': 0}, 'ensemble'),
    ({'threads': 0}, 'threads'),
    ({'weights': {'nu': {'source': 'constant'}}}, 'weights.nu'),
    ({'weights': {'mu': {'source': 'cascade', 'value': 1}}}, 'weights.mu.value'),
    ({'symbol': {'source': 'noise'}}, 'symbol.source'),
    ({'operators': [{'type': 'shift', 'axes': [0, 1], 'complexity': [[3, 0], [0, 0]]}]}, 'operators[0].complexity'),
    ({'operators': [{'type': 'partial', 'axes': [0]}]}, 'operators[0].axes'),
    ({'operators': [{'type': 'partial', 'axes': [0, 1], 'complexity': [-1, 0]}]}, 'operators[0].complexity'),
    ({'operators': [{'type': 'partial', 'axes': [0, 1], 'complexity': [0, 0.5]}]}, 'operators[0].complexity'),
    ({'operators': [{'type': 'full', 'axes': [0, 1], 'flavor': 'half'}]}, 'operators[0].flavor'),
    ({'operators': [{'type': 'shift', 'axes': [0, 1], 'complexity': [[0, 0], [0, 0]], 'theta': 2}]},
     'operators[0].theta'),
    ({'operators': [{'type': 'shift', 'axes': [2]}]}, 'operators[0].axes[0]'),
    ({'operators': [{'type': 'shift', 'axes': [0], 'complexity': [[0, 0]]}]}, 'operators'),
    ({'operators': []}, 'operators'),
    ({'partition': [[0], [0]]}, 'partition'),
    ({'functionals': [{'kind': 'norm'}]}, 'functionals[0].kind'),
    ({'functionals': [{'kind': 'lp', 'input': 'g'}]}, 'functionals[0].input'),
    ({'fixture': 'maybe'}, 'fixture'),
    ({'test_family': 'balls'}, 'test_family'),
    ({'budget': 0}, 'budget'),
    ({'grids': [[13]]}, 'grids[0]'),
])
def test_invalid_fields_name_their_path(changes, field):
    with pytest.raises(ConfigError) as error:
        ExperimentConfig.from_dict(document(**changes))
    assert error.value.field == field


def test_grid_is_required_outside_verify():
    doc = document()
    del doc['grid']
    with pytest.raises(ConfigError, match='grid must be provided'):
        ExperimentConfig.from_dict(doc)
    assert ExperimentConfig.from_dict({'version': 1, 'experiment': 'verify'}).grid is None


def test_operator_path_skips_axis_coverage():
    config = ExperimentConfig.from_dict(document(operators=[{'path': 'shift.json'}]))
    assert config.operators == [{'path': 'shift.json'}]


def test_load_strips_priority_tags(tmp_path):
    path = tmp_path / '[H][PP]bloom_small.yaml'
    path.write_text(yaml.safe_dump(document()), encoding='utf-8')
    config = ExperimentConfig.load(path)
    assert config.name == 'bloom_small'


def test_load_accepts_json(tmp_path):
    path = tmp_path / 'bloom.json'
    path.write_text(json.dumps(document(name='from_json')), encoding='utf-8')
    assert ExperimentConfig.load(path).name == 'from_json'


def test_load_rejects_invalid_yaml(tmp_path):
    path = tmp_path / 'broken.yaml'
    path.write_text('version: [1\n', encoding='utf-8')
    with pytest.raises(ConfigError, match='not valid YAML'):
        ExperimentConfig.load(path)


def test_dump_round_trips():
    config = ExperimentConfig.from_dict(document(name='dumped'))
    again = ExperimentConfig.from_dict(yaml.safe_load(config.dump()))
    assert again.to_dict() == config.to_dict()


def test_output_path(monkeypatch, tmp_path):
    monkeypatch.setenv('DYADIC_OUTPUT_DIR', str(tmp_path))
    assert ExperimentConfig.from_dict(document(name='demo')).output_path() == tmp_path / 'demo.csv'
    assert str(ExperimentConfig.from_dict(document(output='x/y.csv')).output_path()) == 'x/y.csv'


def test_shipped_experiments_are_valid():
    from pathlib import Path

    folder = Path(__file__).resolve().parent.parent / 'experiments'
    configs = [ExperimentConfig.load(path) for path in sorted(folder.glob('*.yaml'))]
    assert len(configs) >= 24
    assert {config.name for config in configs} >= {'verify', 'bloom_m2_p2_depth5', 'search_m2_depth4'}


def test_shipped_ensembles_cover_every_exponent():
    from pathlib import Path

    folder = Path(__file__).resolve().parent.parent / 'experiments'
    configs = [ExperimentConfig.load(path) for path in sorted(folder.glob('*.yaml'))]
    ensembles = [config for config in configs
                 if config.experiment in ('commutator', 'paraproduct', 'square_function', 'fefferman_stein',
                                          'embedding')]
    assert all(config.ensemble >= 100 for config in ensembles)
    exponents = {}
    for config in ensembles:
        if config.grid.levels != (5, 5):
            continue
        family = (config.experiment, tuple(sorted(template['type'] for template in config.operators or [])))
        exponents.setdefault(family, set()).add(config.p)
    for family in [('commutator', ('shift', 'shift')), ('commutator', ('partial',)), ('commutator', ('full',)),
                   ('paraproduct', ()), ('square_function', ()), ('fefferman_stein', ())]:
        assert exponents[family] == {1.5, 2.0, 3.0}
    assert ('embedding', ()) in exponents
