"""
catrepeater/commands/registry.py
================================

Single registry of CLI subcommands shared across the command modules.

How registration works
----------------------
1. **Decorator**: each command module decorates its handler with
   ``@command(name, help, arguments)``.  The decorator records a
   ``Command`` in ``COMMANDS``; argparse flags are declared next to the
   handler that reads them.

2. **Singleton**: there is exactly one ``COMMANDS`` dict.  ``cli.py``
   walks it to build one subparser per entry.

3. **Side-effect imports**: the imports at the bottom of this file run
   every decorator, so importing the registry is enough to see every
   subcommand.

Handlers receive ``(args, run, config)`` and return the process exit code.
"""

import argparse
from dataclasses import dataclass
from typing import Any, Callable, Dict, Sequence, Tuple

from ..config import Config, RunConfig

Handler = Callable[[argparse.Namespace, RunConfig, Config], int]
Argument = Tuple[Tuple[str, ...], Dict[str, Any]]


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    handler: Handler
    arguments: Tuple[Argument, ...] = ()


# The central registry.  All @command decorators register on this object.
COMMANDS: Dict[str, Command] = {}


def command(name: str, help: str, arguments: Sequence[Argument] = ()) -> Callable[[Handler], Handler]:
    """Register ``handler`` as subcommand ``name``."""

    def decorator(handler: Handler) -> Handler:
        COMMANDS[name] = Command(name, help, handler, tuple(arguments))
        return handler

    return decorator


# ── Import all command modules to trigger @command registration ──────────────
# Order here is the order subcommands appear in --help.
from . import sweep_commands  # noqa: E402, F401
from . import verify_commands  # noqa: E402, F401
from . import reproduce_commands  # noqa: E402, F401
