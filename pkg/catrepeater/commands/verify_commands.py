"""
catrepeater/commands/verify_commands.py
=======================================

``verify``: run the self-consistency suite and print one line per check.
Exit code 1 when any check fails.
"""

import argparse
import sys

import pandas as pd

from ..config import Config, RunConfig
from ..tools.error_handler import EXIT_OK, EXIT_VERIFY_FAILED
from ..tools.formatters import format_as_table, write_csv
from ..tools.verification import run_verification
from .registry import command


@command(
    "verify",
    "Check closed forms against the Fock-space oracle",
    arguments=(
        (("--perturb-series",), {"type": float, "default": 0.0, "help": "test mode: distort the series coefficients"}),
        (("--skip-graph",), {"action": "store_true", "help": "skip the four-node graph equivalence"}),
    ),
)
def cmd_verify(args: argparse.Namespace, run: RunConfig, config: Config) -> int:
    results = run_verification(args.perturb_series, include_graph=not args.skip_graph, k_max=config.k_max)
    rows = [result.as_row() for result in results]
    print(format_as_table(rows), file=sys.stdout)
    if args.out:
        write_csv(pd.DataFrame(rows), args.out, "verify", {"perturb_series": args.perturb_series})
    return EXIT_OK if all(result.passed for result in results) else EXIT_VERIFY_FAILED
