import argparse
import sys
from os import getenv

from dotenv import load_dotenv
from rich.console import Console

from config import FIXTURE_MODES, SCHEMA_VERSION, ConfigError, ExperimentConfig
from dyadic.errors import IdentityError
from pipeline import EXIT_CONFIG, EXIT_IDENTITY, EXIT_PASS, Pipeline
from processors import get_processor
from processors.ensemble_processor import ENSEMBLE_EXPERIMENTS

COMMAND_EXPERIMENTS = {
    'verify': ('verify',),
    'norms': ('norms',),
    'bloom': ENSEMBLE_EXPERIMENTS,
    'search': ('search',),
    'gen': ('gen',),
}

console = Console()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dyadic-lab',
                                     description='Multi-parameter dyadic harmonic analysis laboratory.')
    commands = parser.add_subparsers(dest='command', required=True)

    def add_common(command: argparse.ArgumentParser, config_required: bool):
        command.add_argument('--config', required=config_required, help='YAML (or JSON) experiment config')
        command.add_argument('--out', help='output CSV path')
        command.add_argument('--seed', type=int, help='base seed, overrides the config')
        command.add_argument('--fixture', choices=FIXTURE_MODES, help='fixture mode, overrides the config')
        command.add_argument('--threads', type=int, help='worker threads (default: DYADIC_THREADS or logical cores)')

    verify = commands.add_parser('verify', help='run the exact-identity suites')
    add_common(verify, config_required=False)
    verify.add_argument('--replay', help='re-run the instance stored in a replay artifact')
    for name, text in (('norms', 'evaluate norms and weight constants'),
                       ('bloom', 'run a seeded ensemble of ratios'),
                       ('search', 'worst-case search of the Bloom ratio'),
                       ('gen', 'emit operator, weight and symbol files')):
        add_common(commands.add_parser(name, help=text), config_required=True)
    run = commands.add_parser('run', help='run every experiment config of a directory')
    run.add_argument('--dir', default=getenv('DYADIC_EXPERIMENTS_DIR', './experiments'))
    run.add_argument('--seed', type=int)
    run.add_argument('--fixture', choices=FIXTURE_MODES)
    run.add_argument('--threads', type=int)
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.load(args.config)
    else:
        config = ExperimentConfig.from_dict({'version': SCHEMA_VERSION, 'name': 'verify', 'experiment': 'verify'})
    allowed = COMMAND_EXPERIMENTS[args.command]
    if config.experiment not in allowed:
        raise ConfigError('experiment', f'the {args.command} command runs {list(allowed)}, got {config.experiment}')
    return config


def main(argv=None) -> int:
    """
    Command-line entry point.

    - Loads environment variables from a .env file.
    - Runs one experiment config, a verification or a whole directory of configs.

    :return: 0 on success, 1 on identity or fixture failures, 2 on configuration errors.
    """
    load_dotenv()
    args = build_parser().parse_args(argv)
    overrides = {key: getattr(args, key, None) for key in ('out', 'seed', 'fixture', 'threads')}
    overrides = {key: value for key, value in overrides.items() if value is not None}

    if args.command == 'run':
        return Pipeline(args.dir, **overrides).run()

    try:
        config = load_config(args)
        processor = get_processor(config, **overrides)
        if getattr(args, 'replay', None):
            row = processor.replay(args.replay)
            console.log(f"[bold green]Replay of {row['suite']} on grid {row['levels']} passed", style='green')
            return EXIT_PASS
        processor.run()
        processor.handle_outputs()
    except ConfigError as e:
        console.log(f'[bold red]Invalid config: {e}', style='red')
        return EXIT_CONFIG
    except IdentityError as e:
        console.log(f'[bold red]{e}', style='red')
        if e.artifact:
            console.log(f'[bold red]Replay artifact: {e.artifact}', style='red')
        return EXIT_IDENTITY
    console.log(f'[bold green]{config.name}: done', style='green')
    return EXIT_PASS


if __name__ == '__main__':
    sys.exit(main())
