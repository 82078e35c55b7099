import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from dyadic.grid import GridFunction, MultiGrid  # noqa: E402
from dyadic.seeding import SplitMix64  # noqa: E402


def random_function(grid: MultiGrid, seed: int) -> GridFunction:
    return GridFunction(grid, SplitMix64(seed).normal(grid.total_cells).reshape(grid.shape))


@pytest.fixture
def grid_1d():
    return MultiGrid((3,))


@pytest.fixture
def grid_2d():
    return MultiGrid((3, 2))


@pytest.fixture
def grid_3d():
    return MultiGrid((2, 2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def isolated_dirs(tmp_path, monkeypatch):
    """Points every output, fixture and log directory at a temporary folder."""
    for name in ('output', 'fixtures', 'logs'):
        (tmp_path / name).mkdir()
    monkeypatch.setenv('DYADIC_OUTPUT_DIR', str(tmp_path / 'output'))
    monkeypatch.setenv('DYADIC_FIXTURE_DIR', str(tmp_path / 'fixtures'))
    monkeypatch.setenv('DYADIC_LOG_DIR', str(tmp_path / 'logs'))
    return tmp_path
