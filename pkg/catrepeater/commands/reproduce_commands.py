"""
catrepeater/commands/reproduce_commands.py
==========================================

``reproduce <id>``: run a figure recipe and write its CSV bundle.

Files land in ``--out`` (a directory, default ``CATREPEATER_OUTPUT_DIR``)
as ``fig<id>_<table>.csv`` plus ``fig<id>_summary.csv``.  The summary is
also printed as a Markdown table.
"""

import argparse
import logging
import sys
from pathlib import Path

from ..config import Config, RunConfig
from ..tools.figures import reproduce
from ..tools.formatters import format_as_table, write_csv
from .registry import command

logger = logging.getLogger(__name__)


@command(
    "reproduce",
    "Regenerate the data behind a published figure",
    arguments=((("figure_id",), {"type": int, "help": "figure id (2-6)"}),),
)
def cmd_reproduce(args: argparse.Namespace, run: RunConfig, config: Config) -> int:
    settings = run.optimize
    search = {
        "alpha_bounds": (settings.alpha_min, settings.alpha_max),
        "alpha_points": settings.alpha_points,
        "m_max": settings.m_max,
    }
    bundle = reproduce(args.figure_id, run.protocol, search)

    out_dir = Path(args.out or config.output_dir)
    provenance = {**run.provenance(), **{f"assume.{k}": v for k, v in bundle.assumptions.items()}}
    command_name = f"reproduce {bundle.figure_id}"
    for name, table in bundle.tables.items():
        write_csv(table, out_dir / f"fig{bundle.figure_id}_{name}.csv", command_name, provenance)
    write_csv(bundle.summary_frame(), out_dir / f"fig{bundle.figure_id}_summary.csv", command_name, provenance)
    logger.info("wrote %d tables to %s", len(bundle.tables) + 1, out_dir)

    print(f"## {bundle.title}\n", file=sys.stdout)
    print(format_as_table(bundle.summary), file=sys.stdout)
    return 0
