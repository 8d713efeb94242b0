import argparse
import os
import sys
import logging
from typing import List, Optional
from geodl import __version__
from geodl.constants import (
    verify_suites,
    sweep_keys,
    exit_success,
    exit_run_failure,
    exit_config_error,
    exit_verify_failure
)
from geodl.tools.verify import run_suite, format_report
from geodl.utils.config import ConfigError, parse_config, default_config_text
from .info import information
from .run import RunFailure, run_geodl, sweep_geodl


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


def main_parser() -> argparse.ArgumentParser:
    """geodl commandline options argument parser.

    Returns
    -------
    argparse.ArgumentParser
        the argument parser
    """
    parser = argparse.ArgumentParser(
        description=information,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="\n"
    )
    subparsers = parser.add_subparsers(title="Valid subcommands", dest="command")

    parser_run = subparsers.add_parser(
        "run",
        help="Run every (mode, seed) pair of a configuration.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser_run.add_argument(
        "--config", "-c", help="Configuration file (key = value lines or flat JSON).", dest="config"
    )
    parser_run.add_argument(
        "--out", "-o", help="Output directory, overrides output_path.", default=None, dest="out"
    )

    parser_verify = subparsers.add_parser(
        "verify",
        help="Run a property suite and report measured tolerances.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser_verify.add_argument(
        "suite", choices=verify_suites, help="Suite to run."
    )
    parser_verify.add_argument(
        "--config", "-c", help="Configuration used by the directional check.", default=None, dest="config"
    )
    parser_verify.add_argument(
        "--full", action="store_true",
        help="Also check the forgetting trend of geodl against none over every seed of the config."
    )

    subparsers.add_parser(
        "defaults",
        help="Print the default configuration.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )

    parser_sweep = subparsers.add_parser(
        "sweep",
        help="Rerun a configuration once per value of one key.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser_sweep.add_argument(
        "--config", "-c", help="Configuration file.", default=None, dest="config"
    )
    parser_sweep.add_argument(
        "--key", "-k", choices=sweep_keys, required=True, help="Key to sweep."
    )
    parser_sweep.add_argument(
        "--values", "-v", required=True, help="Comma-separated values of the key."
    )
    parser_sweep.add_argument(
        "--out", "-o", help="Output directory, overrides output_path.", default=None, dest="out"
    )

    parser.add_argument(
        '--version',
        action='version',
        version='geodl v%s' % __version__,
    )
    return parser


def parse_args(args: Optional[List[str]] = None):
    """geodl commandline options argument parsing.

    Parameters
    ----------
    args: List[str]
        list of command line arguments, main purpose is testing default option None
        takes arguments from sys.argv
    """
    parser = main_parser()
    parsed_args = parser.parse_args(args=args)
    if parsed_args.command is None:
        parser.print_help()
    return parsed_args


def main(args: Optional[List[str]] = None) -> int:
    args = parse_args(args)
    try:
        if args.command == "run":
            run_geodl(parse_config(args.config), args.out)
        elif args.command == "sweep":
            values = [vv.strip() for vv in args.values.split(",") if vv.strip()]
            sweep_geodl(parse_config(args.config), args.key, values, args.out)
        elif args.command == "verify":
            results = run_suite(args.suite, parse_config(args.config), full=args.full)
            print(format_report(results))
            if not all(rr.passed for rr in results):
                return exit_verify_failure
        elif args.command == "defaults":
            print(default_config_text(), end="")
    except ConfigError as err:
        logger.error(str(err))
        return exit_config_error
    except RunFailure as err:
        logger.error(str(err))
        return exit_run_failure
    except ValueError as err:
        logger.error(str(err))
        return exit_run_failure
    return exit_success
