from sources.file_source import FileSource
from sources.generated_source import CascadeSource, ConstantSource, RandomFieldSource
from sources.source import Source

SOURCE_CLASSES = {
    'cascade': CascadeSource,
    'random': RandomFieldSource,
    'constant': ConstantSource,
    'file': FileSource,
}


def get_source(descriptor: dict, **kwargs) -> Source:
    """
    Retrieves the appropriate source class based on a descriptor ``{source: ..., ...}``.

    :param descriptor: The source descriptor from the experiment configuration.
    :param kwargs: Context passed to every source (name, experiment, root_output_dir).
    :return: An instance of the appropriate source class.
    :raises ValueError: If the source is missing or unsupported.
    """
    source_name = descriptor.get('source')
    if source_name is None:
        raise ValueError('source must be provided')

    source_class = SOURCE_CLASSES.get(source_name)
    if source_class is None:
        raise ValueError(f'Unsupported source: {source_name}')

    options = {key: value for key, value in descriptor.items() if key != 'source'}
    return source_class(source=source_name, **options, **kwargs)
