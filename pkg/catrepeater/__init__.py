"""
catrepeater/__init__.py
=======================

Secret-key-rate modelling of multiplexed quantum repeaters that send
cat-code-encoded light.

The numerical layer lives in ``catrepeater.core``; sweeps, optimization
and figure recipes in ``catrepeater.tools``; the command line in
``catrepeater.cli``::

    from catrepeater import ProtocolConfig, skr
    report = skr(ProtocolConfig(l_tot=1000, l0=1, m=3, alpha=1.268))
"""

from .core.rate_model import ProtocolConfig, RateReport, skr  # noqa: F401
from .errors import CatRepeaterError, ConfigError, NumericDomainError  # noqa: F401

__version__ = "0.1.0"

__all__ = ["ProtocolConfig", "RateReport", "skr", "CatRepeaterError", "ConfigError", "NumericDomainError"]
