"""Entry point for ``python -m catrepeater``."""

import sys

from .cli import main

sys.exit(main())
