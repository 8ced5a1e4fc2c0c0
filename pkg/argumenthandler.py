import argparse
import logging
import pprint

import yaml

from horizontable import TABLE4_HORIZONS, parse_transition
from markovchain import StateId

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('validate', 'horizons', 'absorb', 'estimate', 'fit', 'simulate', 'plotdata', 'delegations')
MATRIX_KINDS = ('paper', 'file', 'mle', 'fit')


class UsageError(Exception):
    def __init__(self, value):
        self.value = value

    def __str__(self):
        return str(self.value)


def _parse_day(text):
    try:
        return int(text)
    except ValueError:
        raise UsageError('not a day count: %r' % text)


def parse_days(text):
    """'7,15,30', '1..365', 'table4' or any comma-separated mix of them."""
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        text = ','.join(str(t) for t in text)
    days = []
    for item in str(text).split(','):
        item = item.strip()
        if not item:
            continue
        if item.lower() == 'table4':
            days.extend(TABLE4_HORIZONS)
        elif '..' in item:
            first, last = item.split('..', 1)
            days.extend(range(_parse_day(first), _parse_day(last) + 1))
        else:
            days.append(_parse_day(item))
    if any(d < 0 for d in days):
        raise UsageError('days must be nonnegative: %s' % text)
    return sorted(set(days))


def parse_matrix_source(text):
    """'paper', 'file:PATH', 'mle[:PATH]' or 'fit[:PATH]' -> (kind, path or None)."""
    kind, _, path = str(text).partition(':')
    kind = kind.strip().lower()
    if kind not in MATRIX_KINDS:
        raise UsageError('unknown matrix source %r, expected one of %s' % (text, ', '.join(MATRIX_KINDS)))
    if kind == 'paper' and path:
        raise UsageError('the published matrix takes no path')
    if kind == 'file' and not path:
        raise UsageError('file matrix source needs a path: file:PATH')
    return kind, path or None


class CliConfig:
    def __init__(self, args):
        self.subcommand = args.subcommand
        self.matrix_kind, self.matrix_path = parse_matrix_source(args.matrix)
        self.matrix_source = args.matrix
        self.out = args.out
        self.format = args.format
        self.days = parse_days(args.days)
        self.seed = int(args.seed)
        self.n = int(args.n)
        self.strict = bool(args.strict)
        self.start = self._parse_state(args.start)
        self.input = args.input
        self.locality = args.locality
        self.delegations = args.delegations
        self.regions = args.regions
        self.transitions = self._parse_transitions(args.transitions)
        self.max_iter = int(args.max_iter)
        self.tolerance = float(args.tolerance)
        self.workers = int(args.workers)
        if self.n < 1:
            raise UsageError('--n must be at least 1')
        if self.days is not None and not self.days:
            raise UsageError('--days must name at least one horizon')

    def __str__(self):
        return pprint.pformat(vars(self))

    @staticmethod
    def _parse_state(text):
        try:
            return StateId.parse(text)
        except ValueError as e:
            raise UsageError(e)

    @staticmethod
    def _parse_transitions(text):
        if not text:
            return None
        try:
            return [parse_transition(t) for t in str(text).split(',') if t.strip()]
        except ValueError as e:
            raise UsageError(e)


class ArgumentHandler:
    def __init__(self, argv=None):
        parser, subparsers = self.create_parser()
        self.args = ArgumentHandler.parse_args(parser, subparsers, argv)

    def get_args(self):
        return self.args

    def get_config(self):
        return CliConfig(self.args)

    @staticmethod
    def create_common_parser():
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--matrix', default='paper',
                            help='matrix source: paper, file:PATH, mle[:PATH] or fit[:PATH]')
        common.add_argument('--out', default=None, help='write the report here instead of stdout')
        common.add_argument('--format', default='csv', choices=['csv', 'json'], help='report format')
        common.add_argument('--days', '--horizons', dest='days', default=None,
                            help='day horizons: comma list, A..B ranges or "table4"')
        common.add_argument('--seed', default=42, type=int, help='base seed of the simulation')
        common.add_argument('--n', default=10000, type=int, help='number of simulated trajectories')
        common.add_argument('--strict', default=False, action='store_true',
                            help='exit 1 when any data finding fails')
        common.add_argument('--config-file', dest='config_file', default=None,
                            help='config file in yaml format supplying defaults for these flags')

        simulation_group = common.add_argument_group('Simulation options')
        simulation_group.add_argument('--start', default='I', help='initial state of simulated trajectories')
        simulation_group.add_argument('--workers', default=1, type=int,
                                      help='threads used for trajectory chunks (output does not depend on it)')

        data_group = common.add_argument_group('Data options')
        data_group.add_argument('--input', default=None,
                                help='count table (estimate), horizon table (fit, horizons reference) '
                                     'or official data file (delegations)')
        data_group.add_argument('--locality', default='CDMX', help='locality for the consistency checks')
        data_group.add_argument('--delegations', default=None, help='official data file, one row per delegation')
        data_group.add_argument('--regions', default=None, help='hospitalization regions file, one row per delegation')
        data_group.add_argument('--transitions', default=None,
                                help='transitions for plotdata, e.g. IF,HS (defaults to the ten table columns)')

        fit_group = common.add_argument_group('Fit options')
        fit_group.add_argument('--max-iter', dest='max_iter', default=10000, type=int,
                               help='iteration limit of the horizon fit')
        fit_group.add_argument('--tolerance', default=1e-12, type=float,
                               help='relative residual improvement that stops the horizon fit')
        return common

    @staticmethod
    def create_parser():
        common = ArgumentHandler.create_common_parser()
        parser = argparse.ArgumentParser(prog='covidchain',
                                         description='Markov chain model of COVID-19 progression in Mexico City')
        parser.add_argument('--version', default=False, action='store_true', help='print version and exit')
        sub = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND')
        helps = {
            'validate': 'check that the matrix is row-stochastic',
            'horizons': 'n-step probabilities of the ten tabulated transitions',
            'absorb': 'absorbing-chain analysis (fundamental matrix, absorption, expected days)',
            'estimate': 'frequency estimate from crossed counts plus consistency findings',
            'fit': 'recover a daily matrix from a horizon table',
            'simulate': 'Monte Carlo cohort compared with exact probabilities',
            'plotdata': 'long-format day,from,to,probability series',
            'delegations': 'official data checks and rankings for the delegations',
        }
        subparsers = {}
        for name in SUBCOMMANDS:
            subparsers[name] = sub.add_parser(name, parents=[common], help=helps[name])
        return parser, subparsers

    @staticmethod
    def read_config_file(path):
        logger.info('Using config file %s', path)
        with open(path) as fo:
            try:
                data = yaml.safe_load(fo) or {}
            except yaml.YAMLError as e:
                raise UsageError('config file %s is not valid YAML: %s' % (path, e))
        if not isinstance(data, dict):
            raise UsageError('config file %s must hold a mapping of option names to values' % path)
        defaults = {}
        logger.debug('Values read from config file: %s', data.items())
        for key, value in data.items():
            key = key.replace('-', '_')
            if value is None or value == '':
                logger.warning('Omitting empty value from config file for key: %s!', key)
                continue
            if isinstance(value, list):
                value = ','.join(str(v) for v in value)
            logger.debug('Using param from config file: %s=%s', key, value)
            defaults[key] = value
        return defaults

    @staticmethod
    def parse_args(parser, subparsers, argv=None):
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument('--config-file', dest='config_file', default=None)
        known, _ = pre.parse_known_args(argv)
        if known.config_file:
            # config values become defaults, explicit flags still win
            defaults = ArgumentHandler.read_config_file(known.config_file)
            for subparser in subparsers.values():
                subparser.set_defaults(**defaults)

        args = parser.parse_args(argv)
        if not args.version and not args.subcommand:
            parser.error('a subcommand is required: %s' % ', '.join(SUBCOMMANDS))
        logger.debug('Command line arguments after processing: %s', pprint.pformat(vars(args)))
        return args
