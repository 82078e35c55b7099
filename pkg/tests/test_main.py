import pytest
import yaml

from main import build_parser, main

VERIFY = {'version': 1, 'name': 'verify_small', 'experiment': 'verify', 'suites': ['telescoping'],
          'grids': [[2]]}
NORMS = {'version': 1, 'name': 'norms_small', 'experiment': 'norms', 'grid': {'levels': [2, 1]},
         'functionals': [{'kind': 'lp', 'input': 'function'}, {'kind': 'product_bmo'}]}


def write(folder, name, document):
    path = folder / name
    path.write_text(yaml.safe_dump(document), encoding='utf-8')
    return str(path)


def test_verify_small_config(isolated_dirs):
    assert main(['verify', '--config', write(isolated_dirs, 'verify.yaml', VERIFY)]) == 0


def test_verify_failure_and_replay(isolated_dirs, monkeypatch):
    config = write(isolated_dirs, 'verify.yaml', VERIFY)
    monkeypatch.setattr('dyadic.haar._LEFT_SIGN', -1.0)
    assert main(['verify', '--config', config, '--seed', '11']) == 1
    artifacts = list((isolated_dirs / 'logs' / 'replay').glob('telescoping_2_*.json'))
    assert len(artifacts) == 1
    assert main(['verify', '--replay', str(artifacts[0])]) == 1
    monkeypatch.undo()
    assert main(['verify', '--replay', str(artifacts[0])]) == 0


def test_norms_writes_report(isolated_dirs):
    out = isolated_dirs / 'norms.csv'
    assert main(['norms', '--config', write(isolated_dirs, 'norms.yaml', NORMS), '--out', str(out),
                 '--threads', '2', '--fixture', 'regenerate']) == 0
    assert out.read_text(encoding='utf-8').startswith('kind,axes,p,value,seed,source\n')
    assert (isolated_dirs / 'norms.csv.summary.yaml').exists()
    assert (isolated_dirs / 'fixtures' / 'norms_small.yaml').exists()


def test_command_must_match_experiment(isolated_dirs):
    assert main(['bloom', '--config', write(isolated_dirs, 'norms.yaml', NORMS)]) == 2


def test_invalid_config(isolated_dirs):
    assert main(['norms', '--config', write(isolated_dirs, 'bad.yaml', {**NORMS, 'p': 0.5})]) == 2


def test_run_directory(isolated_dirs):
    folder = isolated_dirs / 'experiments'
    folder.mkdir()
    write(folder, 'norms.yaml', NORMS)
    assert main(['run', '--dir', str(folder), '--fixture', 'off']) == 0
    assert (isolated_dirs / 'output' / 'norms_small.csv').exists()


def test_config_is_required_outside_verify():
    with pytest.raises(SystemExit):
        build_parser().parse_args(['bloom'])
    assert build_parser().parse_args(['verify']).config is None
