"""
catrepeater/tools
=================

Everything built on top of the numerical core.

Modules
-------
- ``explorer.py``     : sweeps, (α, m) optimization, thresholds, cost targets.
- ``figures.py``      : reproduction recipes for the published figures.
- ``verification.py`` : closed form vs. oracle self-consistency suite.
- ``error_handler.py``: pattern-matched error reports and exit codes.
- ``formatters.py``   : Markdown tables and provenance-stamped CSV.
"""

from .error_handler import ErrorHandler  # noqa: F401
from .explorer import SweepSpec, find_threshold, optimize, solve_cost_target, sweep  # noqa: F401
from .formatters import format_as_table, write_csv  # noqa: F401

__all__ = [
    "ErrorHandler",
    "SweepSpec",
    "find_threshold",
    "format_as_table",
    "optimize",
    "solve_cost_target",
    "sweep",
    "write_csv",
]
