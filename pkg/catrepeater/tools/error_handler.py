"""
catrepeater/tools/error_handler.py
==================================

Actionable error reports for the command line.

Design Strategy
---------------
The core raises precise exceptions (``catrepeater.errors``) with terse,
technical messages.  ``ErrorHandler`` matches them against class-level
pattern tables and returns:

1. A plain ``message`` saying what went wrong.
2. Concrete ``suggestions`` for the next attempt.
3. The process exit code (2 for configuration, 3 for numeric domain).

So ``"CHAIN_L0: l0=3 km exceeds l_tot=2 km"`` becomes:

    ❌ InvalidValue
    A run-file value is outside its allowed range.
    Suggestions: Check the key named in the details, ...

Everything is static; the pattern tables are class-level constants.
"""

import re
from typing import Dict, List, Optional, Tuple

from ..errors import (
    CatRepeaterError,
    ConfigError,
    DimensionBudgetError,
    DiscriminationError,
    NoCrossingError,
    NumericDomainError,
    TruncationError,
    ZeroRateError,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ErrorHandler:
    """Translates catrepeater exceptions into messages, suggestions and exit codes.

    Attributes
    ----------
    CONFIG_ERRORS:
        Map of message pattern (regex) → ``{type, message, suggestions}``.
    NUMERIC_ERRORS:
        Map of exception class → ``{type, message, suggestions}``.
    """

    # ── Configuration patterns ────────────────────────────────────────────────
    # Keys are regex patterns matched against the lowercased exception message.
    CONFIG_ERRORS: Dict[str, dict] = {
        "unknown config key": {
            "type": "UnknownKey",
            "message": "The run file contains a key that catrepeater does not know.",
            "suggestions": [
                "Check the key spelling; keys are upper case with a section prefix",
                "Valid prefixes are CHAIN_, CODE_, PROTOCOL_, DEVICE_, MEMORY_, SWEEP_, OPTIMIZE_, OUTPUT_",
            ],
        },
        "unknown sweep axis": {
            "type": "UnknownAxis",
            "message": "A SWEEP_ key names a parameter that cannot be swept.",
            "suggestions": [
                "Sweep a numeric protocol parameter such as SWEEP_ALPHA or SWEEP_L_TOT",
                "Use SWEEP_MEASUREMENT_ERROR for 1 - p_m",
            ],
        },
        "unknown figure": {
            "type": "UnknownFigure",
            "message": "There is no reproduction recipe for that figure id.",
            "suggestions": ["Pick one of the figure ids 2, 3, 4, 5 or 6"],
        },
        "config file not found": {
            "type": "FileNotFound",
            "message": "The --config path does not point to a file.",
            "suggestions": ["Check the path relative to the working directory"],
        },
        "cannot parse grid|empty grid|non-empty grid|must be sorted": {
            "type": "InvalidGrid",
            "message": "A sweep grid could not be parsed or is empty.",
            "suggestions": [
                "Write grids as start:stop:count or v1,v2,...",
                "Sort list grids in ascending order",
            ],
        },
        "unknown objective": {
            "type": "UnknownObjective",
            "message": "The objective is not one catrepeater can optimize.",
            "suggestions": ["Use per_channel_use, bits_per_second or cost"],
        },
        "needs n_s": {
            "type": "MissingParameter",
            "message": "The cost objective needs the number of matter qubits per link.",
            "suggestions": ["Set PROTOCOL_N_S in the run file"],
        },
    }

    # ── Numeric-domain patterns ───────────────────────────────────────────────
    NUMERIC_ERRORS: Dict[type, dict] = {
        TruncationError: {
            "type": "TruncationError",
            "message": "The Fock-space truncation cannot represent the state accurately.",
            "suggestions": [
                "Lower the cat amplitude alpha",
                "Raise CATREPEATER_K_MAX so verify starts its loss unravelling deeper",
            ],
        },
        DiscriminationError: {
            "type": "DiscriminationError",
            "message": "The codewords are too close to parallel to discriminate unambiguously.",
            "suggestions": ["Move alpha away from zero or from a codeword-overlap maximum"],
        },
        DimensionBudgetError: {
            "type": "DimensionBudgetError",
            "message": "The joint register is too large to hold densely.",
            "suggestions": ["Use fewer photonic nodes or a smaller cutoff"],
        },
        ZeroRateError: {
            "type": "ZeroRate",
            "message": "The secret key rate is zero, so a cost cannot be computed.",
            "suggestions": [
                "Shorten l0 or l_tot",
                "Increase the channel count m or the coherence time t_c",
            ],
        },
        NoCrossingError: {
            "type": "NoCrossing",
            "message": "The searched quantity does not cross its target inside the bracket.",
            "suggestions": [
                "Widen the bracket",
                "Check that the two setups actually differ in the scanned parameter",
            ],
        },
    }

    @staticmethod
    def handle_config_error(error: ConfigError) -> Tuple[str, str, List[str]]:
        """Match a configuration error to a known pattern.

        Returns
        -------
        Tuple[str, str, List[str]]
            ``(error_type, user_message, suggestions)``
        """
        error_str = str(error).lower()
        for pattern, info in ErrorHandler.CONFIG_ERRORS.items():
            if re.search(pattern, error_str):
                return info["type"], info["message"], info["suggestions"]

        return (
            "InvalidValue",
            "A run-file value is outside its allowed range.",
            [
                "Check the key named in the details below",
                "Lengths are in km, times in s, attenuation in dB/km",
            ],
        )

    @staticmethod
    def handle_numeric_error(error: NumericDomainError) -> Tuple[str, str, List[str]]:
        """Match a numeric-domain error by its most specific class."""
        for cls in type(error).__mro__:
            info = ErrorHandler.NUMERIC_ERRORS.get(cls)
            if info is not None:
                return info["type"], info["message"], info["suggestions"]

        return (
            "NumericDomainError",
            "A parameter lies outside the range where the model is defined.",
            ["Check probabilities lie in [0, 1] and lengths and times are positive"],
        )

    @staticmethod
    def handle_error(error: CatRepeaterError) -> Tuple[str, str, List[str], int]:
        """Classify ``error`` and pick its exit code.

        Returns
        -------
        Tuple[str, str, List[str], int]
            ``(error_type, user_message, suggestions, exit_code)``
        """
        if isinstance(error, ConfigError):
            return (*ErrorHandler.handle_config_error(error), EXIT_CONFIG)
        if isinstance(error, NumericDomainError):
            return (*ErrorHandler.handle_numeric_error(error), EXIT_NUMERIC)
        return "CatRepeaterError", "catrepeater could not complete the command.", [], EXIT_CONFIG

    @staticmethod
    def format_error_response(
        error: Exception,
        error_type: str,
        message: str,
        suggestions: List[str],
        key: Optional[str] = None,
    ) -> str:
        """Render the error report printed on stderr.

        Parameters
        ----------
        error:
            Original exception (shown as technical details).
        error_type:
            Short category label.
        message:
            Plain description of what went wrong.
        suggestions:
            Ordered list of things to try.
        key:
            Run-file key at fault, when known.
        """
        response = f"❌ **{error_type}**\n\n{message}\n\n"

        if key:
            response += f"**Key:** `{key}`\n\n"

        if suggestions:
            response += "**💡 Suggestions:**\n"
            for i, suggestion in enumerate(suggestions, 1):
                response += f"{i}. {suggestion}\n"

        response += f"\n**Technical Details:**\n{error}"
        return response
