import pytest
import yaml

from pipeline import EXIT_CONFIG, EXIT_IDENTITY, EXIT_PASS, Pipeline

NORMS = {'version': 1, 'experiment': 'norms', 'grid': {'levels': [1, 1]}, 'seed': 3,
         'functionals': [{'kind': 'little_bmo'}], 'fixture': 'off'}


def write_config(folder, file_name, document=None, text=None):
    path = folder / file_name
    path.write_text(text if text is not None else yaml.safe_dump(document or NORMS), encoding='utf-8')
    return path


@pytest.fixture
def config_dir(isolated_dirs):
    folder = isolated_dirs / 'experiments'
    folder.mkdir()
    return folder


@pytest.mark.parametrize('file_name, expected', [
    ('[PP]a.yaml', 0), ('[P]a.yaml', 1), ('[h]a.yaml', 2), ('a.yaml', 3), ('[L]a.yaml', 4),
])
def test_get_priority(file_name, expected):
    assert Pipeline.get_priority(f'experiments/{file_name}') == expected


def test_remove_tags():
    assert Pipeline.remove_tags('[H][PP]bloom.yaml') == 'bloom.yaml'
    assert Pipeline.remove_tags('plain.yaml') == 'plain.yaml'


def test_load_config_files_orders_and_skips(config_dir):
    write_config(config_dir, '[L]late.yaml')
    write_config(config_dir, 'middle.yaml')
    write_config(config_dir, '[H]early.yml')
    write_config(config_dir, '[D]disabled.yaml', text='{{ not yaml')
    names = [path.name for path in Pipeline(str(config_dir)).load_config_files()]
    assert names == ['[H]early.yml', 'middle.yaml', '[L]late.yaml']


def test_priority_files_run_alone(config_dir, isolated_dirs):
    write_config(config_dir, '[P]first.yaml')
    write_config(config_dir, '[PP]always.yaml')
    write_config(config_dir, 'second.yaml')
    assert Pipeline(str(config_dir)).run() == EXIT_PASS
    output = isolated_dirs / 'output'
    assert (output / 'first.csv').exists()
    assert (output / 'always.csv').exists()
    assert not (output / 'second.csv').exists()
    assert sorted(path.name for path in config_dir.iterdir()) == ['[PP]always.yaml', 'first.yaml', 'second.yaml']


def test_bad_config_returns_config_status(config_dir, isolated_dirs):
    write_config(config_dir, 'good.yaml')
    write_config(config_dir, '[L]broken.yaml', {**NORMS, 'version': 2})
    write_config(config_dir, '[D]disabled.yaml', text='{{ not yaml')
    assert Pipeline(str(config_dir)).run() == EXIT_CONFIG
    assert (isolated_dirs / 'output' / 'good.csv').exists()


def test_fixture_drift_writes_traceback(config_dir, isolated_dirs):
    write_config(config_dir, 'drift.yaml')
    assert Pipeline(str(config_dir), fixture='regenerate').run() == EXIT_PASS
    fixture = isolated_dirs / 'fixtures' / 'drift.yaml'
    frozen = yaml.safe_load(fixture.read_text(encoding='utf-8'))
    frozen['summary']['max'] += 0.5
    fixture.write_text(yaml.safe_dump(frozen), encoding='utf-8')

    assert Pipeline(str(config_dir), fixture='check').run() == EXIT_IDENTITY
    traceback = isolated_dirs / 'logs' / 'traceback_drift.txt'
    assert 'fixture drift' in traceback.read_text(encoding='utf-8')


def test_overrides_reach_processors(config_dir, isolated_dirs):
    write_config(config_dir, 'quiet.yaml', {**NORMS, 'fixture': 'check'})
    assert Pipeline(str(config_dir)).run() == EXIT_IDENTITY
    assert 'missing fixture' in (isolated_dirs / 'logs' / 'traceback_quiet.txt').read_text(encoding='utf-8')
    assert Pipeline(str(config_dir), fixture='off', out='ignored.csv').run() == EXIT_PASS
    assert not (isolated_dirs / 'fixtures' / 'quiet.yaml').exists()
    assert (isolated_dirs / 'output' / 'quiet.csv').exists()
