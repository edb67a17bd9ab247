"""
catrepeater/commands
====================

Every CLI subcommand.

How commands work
-----------------
1. ``registry.py`` holds the single ``COMMANDS`` dict and the ``@command``
   decorator.
2. Each module below decorates its handlers; the registry imports them all
   at the bottom, so ``COMMANDS`` is complete once the registry is loaded.
3. ``catrepeater/cli.py`` builds one argparse subparser per entry.

Command groups
--------------
- ``sweep_commands.py``    : ``sweep``, ``optimize``
- ``verify_commands.py``   : ``verify``
- ``reproduce_commands.py``: ``reproduce <id>``
"""

from .registry import COMMANDS, Command, command  # noqa: F401

__all__ = ["COMMANDS", "Command", "command"]
