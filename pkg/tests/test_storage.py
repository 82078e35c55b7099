import numpy as np
import pytest

from conftest import random_function
from dyadic import storage
from dyadic.errors import GridError, StorageError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import HaarCoeffs, haar_transform


def test_grid_function_binary_layout(grid_2d):
    f = random_function(grid_2d, 3)
    buffer = storage.grid_function_to_bytes(f)
    assert buffer[:4] == b'DYDL'
    assert len(buffer) == 4 + 4 + 4 + 4 * grid_2d.m + 8 * grid_2d.total_cells
    assert np.frombuffer(buffer, dtype='<u4', count=4, offset=4).tolist() == [1, 2, 3, 2]
    restored = storage.grid_function_from_bytes(buffer)
    assert restored.grid == grid_2d
    np.testing.assert_array_equal(restored.data, f.data)


def test_haar_coeffs_keep_their_axes(tmp_path, grid_3d):
    coeffs = haar_transform(random_function(grid_3d, 8), [0, 2])
    path = storage.save(coeffs, tmp_path / 'nested' / 'coeffs.dyhc')
    assert path.read_bytes()[:4] == b'DYHC'
    restored = storage.load(path)
    assert isinstance(restored, HaarCoeffs)
    assert restored.axes == (0, 2)
    np.testing.assert_array_equal(restored.data, coeffs.data)


def test_load_dispatches_on_magic(tmp_path, grid_1d):
    f = random_function(grid_1d, 1)
    restored = storage.load(storage.save(f, tmp_path / 'f.dydl'))
    assert isinstance(restored, GridFunction)
    np.testing.assert_array_equal(restored.data, f.data)


def test_bad_magic(grid_1d):
    buffer = storage.grid_function_to_bytes(random_function(grid_1d, 1))
    with pytest.raises(GridError, match='bad magic'):
        storage.haar_coeffs_from_bytes(buffer)


def test_truncated_payload(grid_1d):
    buffer = storage.grid_function_to_bytes(random_function(grid_1d, 1))
    with pytest.raises(GridError, match='payload size'):
        storage.grid_function_from_bytes(buffer[:-8])


def test_unsupported_version(grid_1d):
    buffer = bytearray(storage.grid_function_to_bytes(random_function(grid_1d, 1)))
    buffer[4:8] = np.array([7], dtype='<u4').tobytes()
    with pytest.raises(GridError, match='version'):
        storage.grid_function_from_bytes(bytes(buffer))


def test_csv_round_trip(tmp_path, grid_2d):
    f = random_function(grid_2d, 6)
    path = storage.write_csv(f, tmp_path / 'f.csv')
    header = path.read_text(encoding='utf-8').splitlines()[0]
    assert header == 'i0,i1,value'
    restored = storage.read_csv(path)
    assert restored.grid == grid_2d
    np.testing.assert_allclose(restored.data, f.data, rtol=1e-15)


def test_frame_layout(grid_1d):
    frame = storage.to_frame(GridFunction(grid_1d, np.arange(8.0)))
    assert list(frame.columns) == ['i0', 'value']
    assert frame['i0'].tolist() == list(range(8))


def test_frame_with_missing_rows():
    frame = storage.to_frame(GridFunction(MultiGrid((2,)), np.arange(4.0))).iloc[[0, 1, 3]]
    with pytest.raises(GridError):
        storage.from_frame(frame)


def test_frame_with_negative_index():
    frame = storage.to_frame(GridFunction(MultiGrid((2,)), np.arange(4.0)))
    frame.loc[0, 'i0'] = -1
    with pytest.raises(StorageError, match=r'row 0 has a negative cell index \[-1\]'):
        storage.from_frame(frame)


def test_frame_with_repeated_cell():
    frame = storage.to_frame(GridFunction(MultiGrid((1, 1)), np.arange(4.0).reshape(2, 2)))
    frame.loc[3, ['i0', 'i1']] = [0, 0]
    with pytest.raises(StorageError, match=r'row 3 repeats cell \[0, 0\]'):
        storage.from_frame(frame)


def test_storage_errors_are_grid_errors():
    assert issubclass(StorageError, GridError)
    with pytest.raises(GridError):
        storage.grid_function_from_bytes(b'nope')
