#!/usr/bin/env python
"""Markov chain model of COVID-19 progression in Mexico City"""
import logging
import logging.config
import os
import sys

import yaml

from argumenthandler import ArgumentHandler, UsageError
from datafiles import DataFileError, emit_report
from estimation import EstimationError
from horizontable import HorizonTableError
from markovchain import MarkovChainError
from reportservice import ReportService
from simulation import SimulationError

__version__ = '0.3.0'
default_logging_config = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'logging.yaml')

logger = logging.getLogger('covidchain')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DOMAIN_ERRORS = (MarkovChainError, EstimationError, SimulationError, DataFileError, HorizonTableError,
                 ValueError)


class CovidChainError(Exception):
    pass


def setup_logging(default_path=default_logging_config, default_level=logging.INFO, env_key='LOG_CFG'):
    """Setup logging configuration, LOG_CFG may point to another yaml file"""
    path = default_path
    value = os.getenv(env_key, None)
    if value:
        path = value
    if os.path.exists(path):
        with open(path, 'rt') as f:
            config = yaml.safe_load(f.read())
        logging.config.dictConfig(config)
    else:
        logging.basicConfig(level=default_level, stream=sys.stderr)


def write_output(data, path=None):
    if path:
        with open(path, 'wb') as fo:
            fo.write(data)
        logger.info('Report written to %s', path)
        return
    stream = getattr(sys.stdout, 'buffer', None)
    if stream is None:
        sys.stdout.write(data.decode('utf-8'))
    else:
        stream.write(data)
    sys.stdout.flush()


def check_output_path(config):
    if not config.out:
        return
    inputs = [config.input, config.delegations, config.regions, config.matrix_path]
    out = os.path.abspath(config.out)
    for path in inputs:
        if path and os.path.abspath(path) == out:
            raise CovidChainError('refusing to overwrite input file %s with the report' % path)


def run(argv=None):
    handler = ArgumentHandler(argv)
    args = handler.get_args()
    if args.version:
        sys.stdout.write('covidchain %s\n' % __version__)
        return EXIT_OK
    config = handler.get_config()
    check_output_path(config)
    logger.debug('Configuration: %s', config)
    doc, status = ReportService(config).run()
    write_output(emit_report(doc, config.format), config.out)
    return status


def main(argv=None):
    setup_logging()
    try:
        return run(argv)
    except SystemExit as e:
        # argparse reports usage errors this way
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except UsageError as e:
        logger.error('Usage error: %s', e)
        return EXIT_USAGE
    except OSError as e:
        logger.error('I/O error: %s', e)
        return EXIT_USAGE
    except DOMAIN_ERRORS as e:
        logger.error('%s: %s', type(e).__name__, e)
        return EXIT_FAILURE
    except CovidChainError as e:
        logger.error('%s', e)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
