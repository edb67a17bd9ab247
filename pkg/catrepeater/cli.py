"""
catrepeater/cli.py
==================

Command-line entry point.

Usage
-----
    python -m catrepeater sweep --config run.env --out sweep.csv
    python -m catrepeater optimize --config run.env
    python -m catrepeater verify
    python -m catrepeater reproduce 3 --out reproduction/

Every subcommand accepts ``--config``, ``--out`` and ``-v``/``-q``.  Logs go
to stderr; CSV goes to ``--out`` or stdout.

Exit codes
----------
0 success, 1 ``verify`` failure, 2 configuration error, 3 numeric-domain
error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from .commands import COMMANDS
from .config import Config, load_run_config
from .errors import CatRepeaterError
from .tools.error_handler import ErrorHandler

logger = logging.getLogger(__name__)

VERBOSITY_LEVELS = {-1: logging.ERROR, 1: logging.INFO, 2: logging.DEBUG}

READOUT_NOTE = (
    "Readout: the logical Z readout discriminates the loss-damped codewords of the observed syndrome "
    "(CODE_USD_CODEWORDS=damped, the default). CODE_USD_CODEWORDS=original discriminates the undamped "
    "codewords instead; both halves of a link must show the desired syndrome unless CODE_SINGLE_SIDE=true."
)


def build_parser() -> argparse.ArgumentParser:
    """One subparser per registered command, each with the shared options."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run file with KEY=value lines")
    common.add_argument("--out", help="output file (sweep, optimize, verify) or directory (reproduce)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    common.add_argument("-q", "--quiet", action="store_true", help="errors only")

    parser = argparse.ArgumentParser(
        prog="catrepeater", description="Cat-code quantum repeater key-rate model", epilog=READOUT_NOTE
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS.values():
        sub = subparsers.add_parser(cmd.name, help=cmd.help, parents=[common])
        for flags, kwargs in cmd.arguments:
            sub.add_argument(*flags, **kwargs)
    return parser


def _level(verbosity: int, default: str) -> int:
    if verbosity in VERBOSITY_LEVELS:
        return VERBOSITY_LEVELS[verbosity]
    level = logging.getLevelName(default.upper())
    return level if isinstance(level, int) else logging.WARNING


def configure_logging(level: int) -> None:
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    config = Config.from_env()

    flag_verbosity = -1 if args.quiet else min(args.verbose, 2)
    configure_logging(_level(flag_verbosity, config.log_level))

    try:
        run = load_run_config(args.config, config)
        if flag_verbosity == 0 and run.verbosity != 0:
            logging.getLogger().setLevel(_level(run.verbosity, config.log_level))
        logger.info("running %s", args.command)
        return COMMANDS[args.command].handler(args, run, config)
    except CatRepeaterError as exc:
        error_type, message, suggestions, code = ErrorHandler.handle_error(exc)
        key = getattr(exc, "key", None)
        print(ErrorHandler.format_error_response(exc, error_type, message, suggestions, key), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
