from pathlib import Path

from dyadic import storage
from dyadic.errors import GridError
from dyadic.grid import GridFunction, MultiGrid
from dyadic.haar import HaarCoeffs
from sources.source import Source


class FileSource(Source):
    """Reads a stored function: binary ``DYDL``/``DYHC`` files or the per-cell CSV format."""
    ACCEPTED = frozenset({'path'})

    def __init__(self, path: str, **kwargs):
        super().__init__(**kwargs)
        self.path = path

    def load(self, grid: MultiGrid, seed: int) -> GridFunction:
        if not Path(self.path).exists():
            raise FileNotFoundError(f'File not found: {self.path}')

        if Path(self.path).suffix.lower() == '.csv':
            f = storage.read_csv(self.path)
        else:
            f = storage.load(self.path)
            if isinstance(f, HaarCoeffs):
                f = f.inverse()

        if f.grid != grid:
            raise GridError(f'{self.path} holds a function on grid {f.grid.levels}, expected {grid.levels}')
        return f

    @property
    def label(self) -> str:
        return f'file:{Path(self.path).name}'
