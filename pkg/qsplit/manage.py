#!/usr/bin/env python
"""qsplit command-line utility."""
import argparse
import logging
import logging.config
import sys
import time
from dataclasses import replace
from pathlib import Path

from marshmallow import ValidationError

from qsplit.core import settings
from qsplit.core.exceptions import QSplitError, ScenarioError, ValidationFailure
from qsplit.core.urls import urlpatterns
from qsplit.core.workers import set_threads

logger = logging.getLogger('qsplit.manage')

PS = 1000.0


def resolve_scenario(value: str) -> Path:
    """
    A path, a bundled alias (barrier, well) or a bundled file name with or
    without its .json suffix
    """
    path = Path(value)
    if path.exists():
        return path
    candidates = [settings.FIXTURES_DIR / f'{value}.json', settings.FIXTURES_DIR / value]
    if value in settings.BUNDLED_SCENARIOS:
        candidates.insert(0, settings.FIXTURES_DIR / settings.BUNDLED_SCENARIOS[value])
    for bundled in candidates:
        if bundled.is_file():
            return bundled
    raise ScenarioError(f"scenario {value} not found (neither a file nor a bundled name)")


def parse_times(value: str):
    try:
        return [float(t) * PS for t in value.split(',') if t.strip()]
    except ValueError as e:
        raise ScenarioError(f"--times expects comma-separated ps values, got {value!r}") from e


def positive_int(value: str) -> int:
    try:
        count = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    if count < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {count}")
    return count


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qsplit',
        description='Transmission/reflection decomposition of 1D scattering and tunneling times',
    )
    parser.add_argument('command', choices=sorted(urlpatterns))
    parser.add_argument('--scenario', required=True, help='scenario JSON file or bundled name (barrier, well)')
    parser.add_argument('--out', default='.', help='output directory')
    parser.add_argument('--times', help='comma-separated times in ps, e.g. "0,0.4,0.42"')
    parser.add_argument('--threads', type=positive_int, help='worker threads (default QSPLIT_THREADS or CPU count)')
    parser.add_argument('--k', type=float, help='stationary: wavenumber in 1/nm (default: the packet k0)')
    parser.add_argument('--l1', type=float, help='distance L1 left of the barrier (nm)')
    parser.add_argument('--l2', type=float, help='distance L2 right of the barrier (nm)')
    parser.add_argument('--region', action='store_true', help='evolve: densities on [a - 10, b + 10] nm')
    parser.add_argument('--skip-oracle', action='store_true', help='validate: leave out the Crank-Nicolson run')
    return parser


def main(argv=None) -> int:
    """Run one command; returns the process exit status"""
    logging.config.dictConfig(settings.LOGGING)
    options = build_parser().parse_args(argv)

    from qsplit.apps.scenarios.models import ScenarioContext
    from qsplit.apps.scenarios.serializers import load_scenario

    start_time = time.time()
    try:
        if options.threads is not None:
            set_threads(options.threads)
        scenario = load_scenario(resolve_scenario(options.scenario))
        scenario = scenario.with_distances(options.l1, options.l2)
        if options.times:
            scenario = replace(scenario, times=parse_times(options.times))
        out = Path(options.out)
        out.mkdir(parents=True, exist_ok=True)

        logger.info(f"Running {options.command} on scenario {scenario.name}")
        result = urlpatterns[options.command](ScenarioContext(scenario), out, options)
        if not result['success']:
            raise ValidationFailure(f"failed checks: {', '.join(result.get('failed', []))}")
    except QSplitError as e:
        logger.error(f"{options.command} failed: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{options.command} failed: {e.messages}")
        print(f"❌ {e.messages}", file=sys.stderr)
        return ScenarioError.exit_code

    logger.info(f"{options.command} finished in {time.time() - start_time:.2f} seconds")
    for path in result.get('outputs', []):
        print(path)
    return 0


if __name__ == '__main__':
    sys.exit(main())
