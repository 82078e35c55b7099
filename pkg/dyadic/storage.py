"""
Binary and CSV formats for grid functions and Haar coefficients.

Binary layout (little endian): 4-byte magic (``DYDL`` for GridFunction, ``DYHC`` for
HaarCoeffs), version u32, m u32, levels m x u32, then for ``DYHC`` a u32 bit mask of the
transformed axes, then the cell data as float64 in row-major order (axis 0 slowest).
"""
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from dyadic.errors import StorageError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import HaarCoeffs

FORMAT_VERSION = 1
GRID_MAGIC = b'DYDL'
COEFFS_MAGIC = b'DYHC'

PathLike = Union[str, Path]


def _header(magic: bytes, grid: MultiGrid) -> bytes:
    fields = np.array([FORMAT_VERSION, grid.m, *grid.levels], dtype='<u4')
    return magic + fields.tobytes()


def _parse(buffer: bytes, magic: bytes) -> Tuple[MultiGrid, int]:
    if buffer[:4] != magic:
        raise StorageError(f'bad magic {buffer[:4]!r}, expected {magic!r}')
    version, m = np.frombuffer(buffer, dtype='<u4', count=2, offset=4)
    if version != FORMAT_VERSION:
        raise StorageError(f'unsupported format version {version}')
    levels = np.frombuffer(buffer, dtype='<u4', count=int(m), offset=12)
    return MultiGrid(tuple(int(n) for n in levels)), 12 + 4 * int(m)


def _payload(buffer: bytes, grid: MultiGrid, offset: int) -> np.ndarray:
    expected = offset + 8 * grid.total_cells
    if len(buffer) != expected:
        raise StorageError(f'payload size {len(buffer)} does not match grid {grid.levels} ({expected} bytes)')
    return np.frombuffer(buffer, dtype='<f8', offset=offset).reshape(grid.shape)


def grid_function_to_bytes(f: GridFunction) -> bytes:
    return _header(GRID_MAGIC, f.grid) + f.data.astype('<f8').tobytes(order='C')


def grid_function_from_bytes(buffer: bytes) -> GridFunction:
    grid, offset = _parse(buffer, GRID_MAGIC)
    return GridFunction(grid, _payload(buffer, grid, offset))


def haar_coeffs_to_bytes(coeffs: HaarCoeffs) -> bytes:
    mask = np.array([sum(1 << axis for axis in coeffs.axes)], dtype='<u4')
    return _header(COEFFS_MAGIC, coeffs.grid) + mask.tobytes() + coeffs.data.astype('<f8').tobytes(order='C')


def haar_coeffs_from_bytes(buffer: bytes) -> HaarCoeffs:
    grid, offset = _parse(buffer, COEFFS_MAGIC)
    mask = int(np.frombuffer(buffer, dtype='<u4', count=1, offset=offset)[0])
    axes = tuple(axis for axis in range(grid.m) if mask >> axis & 1)
    return HaarCoeffs(grid, _payload(buffer, grid, offset + 4), axes)


def save(obj: Union[GridFunction, HaarCoeffs], path: PathLike) -> Path:
    """Writes a GridFunction (``DYDL``) or HaarCoeffs (``DYHC``) file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, HaarCoeffs):
        path.write_bytes(haar_coeffs_to_bytes(obj))
    else:
        path.write_bytes(grid_function_to_bytes(obj))
    return path


def load(path: PathLike) -> Union[GridFunction, HaarCoeffs]:
    """Reads either binary format, dispatching on the magic."""
    buffer = Path(path).read_bytes()
    if buffer[:4] == COEFFS_MAGIC:
        return haar_coeffs_from_bytes(buffer)
    return grid_function_from_bytes(buffer)


def to_frame(f: GridFunction) -> pd.DataFrame:
    """One row per cell: per-axis cell index columns ``i0..i{m-1}`` then ``value``."""
    index = np.indices(f.grid.shape).reshape(f.grid.m, -1)
    frame = pd.DataFrame({f'i{axis}': index[axis] for axis in range(f.grid.m)})
    frame['value'] = f.data.reshape(-1)
    return frame


def from_frame(frame: pd.DataFrame) -> GridFunction:
    index_columns = [column for column in frame.columns if column != 'value']
    if 'value' not in frame.columns or not index_columns:
        raise StorageError('CSV grid functions need index columns and a value column')
    indices = frame[index_columns].to_numpy(dtype=np.int64)
    negative = np.flatnonzero((indices < 0).any(axis=1))
    if negative.size:
        raise StorageError(f'row {negative[0]} has a negative cell index {indices[negative[0]].tolist()}')
    repeated = np.flatnonzero(frame.duplicated(subset=index_columns).to_numpy())
    if repeated.size:
        raise StorageError(f'row {repeated[0]} repeats cell {indices[repeated[0]].tolist()}')
    levels = []
    for column in index_columns:
        cells = int(frame[column].max()) + 1
        levels.append(cells.bit_length() - 1)
        if 2 ** levels[-1] != cells:
            raise StorageError(f'column {column} covers {cells} cells, not a power of two')
    grid = MultiGrid(tuple(levels))
    if len(frame) != grid.total_cells:
        raise StorageError(f'CSV has {len(frame)} rows, grid {grid.levels} has {grid.total_cells} cells')
    data = np.full(grid.shape, np.nan)
    data[tuple(indices.T)] = frame['value'].to_numpy(dtype=np.float64)
    return GridFunction(grid, data)


def write_csv(f: GridFunction, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    to_frame(f).to_csv(path, index=False, lineterminator='\n', float_format='%.17g')
    return path


def read_csv(path: PathLike) -> GridFunction:
    return from_frame(pd.read_csv(path))
