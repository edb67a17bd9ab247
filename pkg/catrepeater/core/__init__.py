"""
catrepeater/core
================

The numerical layer, bottom-up:

- ``fock.py``        : truncated Fock space, loss Kraus operators, trajectory
                        ensembles, USD measurements.
- ``cat_codes.py``   : ℓ-loss cat codewords, syndrome and USD probabilities,
                        ℓ = 1 closed forms.
- ``link_model.py``  : one elementary link: residue-pair table, exact oracle
                        and factorized fast path.
- ``graph_states.py``: hybrid matter-light graph states and Z-pruning.
- ``rate_model.py``  : chain success probabilities, QBERs and key rates.

Nothing here prints, exits or reads configuration files.
"""

from .cat_codes import CatCode  # noqa: F401
from .link_model import LinkOutcome, LinkParams, link_factorized, link_oracle  # noqa: F401
from .rate_model import ProtocolConfig, RateReport, skr  # noqa: F401

__all__ = ["CatCode", "LinkOutcome", "LinkParams", "ProtocolConfig", "RateReport", "link_factorized", "link_oracle", "skr"]
