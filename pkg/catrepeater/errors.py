"""
catrepeater/errors.py
=====================

Exception hierarchy shared by every layer of the package.

Two families
------------
``ConfigError`` covers anything the user wrote: unknown run-file keys,
invalid values, an unknown figure id or sweep axis.  ``NumericDomainError``
covers inputs that are well-formed but outside the domain where the models
are defined: a Fock cutoff that cannot hold a coherent state, parallel
states handed to a discriminator, a zero key rate where a cost is needed.

The CLI maps the two families onto exit codes 2 and 3 (see
``catrepeater.tools.error_handler``); the core never calls ``sys.exit``.
"""


class CatRepeaterError(Exception):
    """Base class for every error raised by catrepeater."""


class ConfigError(CatRepeaterError):
    """A run file, config value, axis name or figure id is invalid."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class NumericDomainError(CatRepeaterError, ValueError):
    """A numerical input lies outside the domain of the model."""


class TruncationError(NumericDomainError):
    """The Fock cutoff or Kraus depth leaves a tail above tolerance."""


class DiscriminationError(NumericDomainError):
    """Two states are too close to parallel for unambiguous discrimination."""


class DimensionBudgetError(NumericDomainError):
    """A joint register would exceed the dense-tensor budget."""


class ZeroRateError(NumericDomainError):
    """A quantity that divides by the key rate was requested at zero rate."""


class NoCrossingError(NumericDomainError):
    """A root or threshold search found no sign change in its bracket."""
