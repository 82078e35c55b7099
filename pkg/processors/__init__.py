from config import ExperimentConfig
from processors.ensemble_processor import EnsembleProcessor
from processors.experiment_processor import ExperimentProcessor
from processors.gen_processor import GenProcessor
from processors.norms_processor import NormsProcessor
from processors.search_processor import SearchProcessor
from processors.verify_processor import VerifyProcessor

PROCESSOR_CLASSES = {
    'verify': VerifyProcessor,
    'norms': NormsProcessor,
    'commutator': EnsembleProcessor,
    'paraproduct': EnsembleProcessor,
    'square_function': EnsembleProcessor,
    'fefferman_stein': EnsembleProcessor,
    'embedding': EnsembleProcessor,
    'search': SearchProcessor,
    'gen': GenProcessor,
}


def get_processor(config: ExperimentConfig, **kwargs) -> ExperimentProcessor:
    """
    Retrieves the appropriate processor class based on the experiment of the configuration.

    :param config: The validated experiment configuration.
    :param kwargs: Command-line overrides (out, seed, fixture, threads).
    :return: An instance of the appropriate processor class.
    :raises ValueError: If the experiment is unsupported.
    """
    processor_class = PROCESSOR_CLASSES.get(config.experiment)
    if processor_class is None:
        raise ValueError(f'Unsupported experiment: {config.experiment}')
    return processor_class(config, **kwargs)
