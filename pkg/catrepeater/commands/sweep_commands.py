"""
catrepeater/commands/sweep_commands.py
======================================

``sweep`` and ``optimize``: the two subcommands driven entirely by the run
file.  Both write one CSV, to ``--out`` or stdout.
"""

import argparse
import logging
import sys

import pandas as pd

from ..config import Config, RunConfig
from ..tools.explorer import SweepSpec, optimize, sweep
from ..tools.formatters import write_csv
from .registry import command

logger = logging.getLogger(__name__)


@command("sweep", "Evaluate the rate model over the SWEEP_ axes of the run file")
def cmd_sweep(args: argparse.Namespace, run: RunConfig, config: Config) -> int:
    axes = run.axes
    if not axes:
        logger.info("no SWEEP_ axes given; evaluating the base point only")
        axes = (("alpha", (run.protocol.alpha,)),)
    frame = sweep(SweepSpec(run.protocol, axes, run.objective))
    write_csv(frame, args.out or sys.stdout, "sweep", run.provenance())
    return 0


@command("optimize", "Maximize the objective over the OPTIMIZE_FREE parameters")
def cmd_optimize(args: argparse.Namespace, run: RunConfig, config: Config) -> int:
    settings = run.optimize
    result = optimize(
        run.protocol,
        free=settings.free,
        alpha_bounds=(settings.alpha_min, settings.alpha_max),
        alpha_points=settings.alpha_points,
        m_max=settings.m_max,
        objective=run.objective,
    )
    frame = pd.DataFrame([result.as_row()])
    write_csv(frame, args.out or sys.stdout, "optimize", run.provenance())
    return 0
