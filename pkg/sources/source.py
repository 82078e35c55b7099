from abc import ABC, abstractmethod
from os import getenv
from pathlib import Path

from pendulum import now

from dyadic.grid import GridFunction, MultiGrid


class Source(ABC):
    """
    Produces a grid function (weight, symbol or test function) for one ensemble instance.

    ACCEPTED lists the descriptor keys a concrete source understands, besides ``source``.
    """
    ACCEPTED = frozenset()

    def __init__(self, **kwargs):
        """
        Initializes the Source object.

        kwargs: Arbitrary keyword arguments. Possible key-value pairs are:
            - 'name': The role of the produced function ('mu', 'symbol', ...), used in file names.
            - 'experiment': The experiment name, used as the artifact sub-folder.
            - 'root_output_dir': The root directory for written artifacts.
            - 'add_timestamp': Whether artifact names carry a timestamp.
        """
        self.kwargs = kwargs
        self.name = kwargs.get('name', 'input')
        self.experiment = kwargs.get('experiment', 'temp')
        self.root_output_dir = kwargs.get('root_output_dir', getenv('DYADIC_OUTPUT_DIR', './output'))
        self.add_timestamp = kwargs.get('add_timestamp', False)

    @abstractmethod
    def load(self, grid: MultiGrid, seed: int) -> GridFunction:
        """
        Abstract method producing the function for ``seed`` on ``grid``.

        Must be implemented by child classes.
        """
        pass

    @property
    def label(self) -> str:
        """Short text identifying the source in report rows."""
        return self.kwargs.get('source', type(self).__name__)

    def generate_folder_name(self) -> Path:
        return Path(self.root_output_dir) / self.experiment

    def generate_fullpath_name(self, extension: str, seed: int = None) -> Path:
        """
        Generates the artifact path for a produced function.

        :param extension: The file extension.
        :param seed: Seed of the instance, appended when given.
        :return: The full path as a Path object.
        """
        file_name = self.name
        if seed is not None:
            file_name = f'{file_name}_{seed}'
        if self.add_timestamp:
            file_name = f"{file_name}_{now().format('YYYYMMDD_HHmmss')}"
        return self.generate_folder_name() / f'{file_name}.{extension}'
