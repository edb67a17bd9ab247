"""
catrepeater/config.py
=====================

Centralised configuration for catrepeater.

Two layers feed every run:

1. ``Config``: process-wide defaults read from environment variables (via
   ``python-dotenv``, so a ``.env`` file at the working directory is
   honoured).  These are the physical constants nobody states in a run
   file: fibre attenuation, signal speed, interaction time.
2. ``RunConfig``: one run, parsed from a flat ``KEY=value`` file passed with
   ``--config``.  Keys are grouped into sections by prefix and validated by
   pydantic; unknown keys are rejected by name.

Environment Variables
---------------------
  - ``CATREPEATER_ATTENUATION_DB_PER_KM``  fibre loss (default ``0.2``).
  - ``CATREPEATER_SIGNAL_SPEED``           signal speed in fibre, m/s (``2e8``).
  - ``CATREPEATER_T0``                     light-matter interaction time, s (``1e-6``).
  - ``CATREPEATER_M_MAX``                  largest channel count the optimizer tries (``64``).
  - ``CATREPEATER_K_MAX``                  initial Kraus unravelling depth for ``verify`` (``12``).
  - ``CATREPEATER_LOG_LEVEL``              root log level (``WARNING``).
  - ``CATREPEATER_OUTPUT_DIR``             default directory for ``reproduce`` (``reproduction``).

Run-file Sections
-----------------
``CHAIN_``     ``L_TOT``, ``L0``, ``FRACTIONAL_LINKS``
``CODE_``      ``ALPHA``, ``LOSS_ORDER``, ``RESIDUES``, ``SINGLE_SIDE``, ``USD_CODEWORDS``
``PROTOCOL_``  ``VARIANT``, ``M``, ``N_S``
``DEVICE_``    ``P_M``, ``T0``, ``SIGNAL_SPEED``, ``ATTENUATION``
``MEMORY_``    ``MODEL``, ``T_C``
``SWEEP_``     ``OBJECTIVE`` and one ``SWEEP_<AXIS>`` per swept parameter
``OPTIMIZE_``  ``ALPHA_MIN``, ``ALPHA_MAX``, ``ALPHA_POINTS``, ``M_MAX``, ``FREE``
``OUTPUT_``    ``VERBOSITY``

Sweep grids are written ``start:stop:count`` (linear, endpoints included)
or as a comma-separated list.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .core.rate_model import ProtocolConfig
from .errors import ConfigError

# Load .env from the working directory before reading env vars
load_dotenv()


def _env_float(name: str, default: str) -> float:
    return float(os.getenv(name, default))


def _env_int(name: str, default: str) -> int:
    return int(os.getenv(name, default))


@dataclass
class Config:
    """Snapshot of the environment-level configuration.

    Fields re-read the environment on every construction, so
    ``Config.from_env()`` picks up variables set after import (tests rely on
    this through ``monkeypatch.setenv``).
    """

    # ── Physical defaults ─────────────────────────────────────────────────────
    attenuation_db_per_km: float = field(
        default_factory=lambda: _env_float("CATREPEATER_ATTENUATION_DB_PER_KM", "0.2")
    )
    """Fibre attenuation in dB/km.  0.2 is the usual telecom-band figure."""

    signal_speed: float = field(default_factory=lambda: _env_float("CATREPEATER_SIGNAL_SPEED", "2e8"))
    """Signal speed in fibre, m/s."""

    t0: float = field(default_factory=lambda: _env_float("CATREPEATER_T0", "1e-6"))
    """Light-matter interaction time in seconds.  An assumption, echoed in every output."""

    # ── Numerics ──────────────────────────────────────────────────────────────
    m_max: int = field(default_factory=lambda: _env_int("CATREPEATER_M_MAX", "64"))
    """Upper end of the integer channel-count search."""

    k_max: int = field(default_factory=lambda: _env_int("CATREPEATER_K_MAX", "12"))
    """Initial Kraus depth for the oracle unravellings ``verify`` runs (extended adaptively)."""

    # ── Runtime ───────────────────────────────────────────────────────────────
    log_level: str = field(default_factory=lambda: os.getenv("CATREPEATER_LOG_LEVEL", "WARNING").upper())
    """Root logger level used by the CLI unless ``-v``/``-q`` override it."""

    output_dir: str = field(default_factory=lambda: os.getenv("CATREPEATER_OUTPUT_DIR", "reproduction"))
    """Directory that ``reproduce`` writes its CSV bundle into by default."""

    @classmethod
    def from_env(cls) -> "Config":
        """Construct a ``Config`` from the current environment.

        Returns
        -------
        Config
            Populated configuration instance.
        """
        return cls()

    def protocol_defaults(self) -> Dict[str, float]:
        """Physical defaults in ``ProtocolConfig`` field names."""
        return {
            "attenuation": self.attenuation_db_per_km,
            "signal_speed": self.signal_speed,
            "t0": self.t0,
        }


# ── Run files ─────────────────────────────────────────────────────────────────

# Run-file key → ProtocolConfig field.
PROTOCOL_KEYS: Dict[str, str] = {
    "CHAIN_L_TOT": "l_tot",
    "CHAIN_L0": "l0",
    "CHAIN_FRACTIONAL_LINKS": "fractional_links",
    "CODE_ALPHA": "alpha",
    "CODE_LOSS_ORDER": "loss_order",
    "CODE_RESIDUES": "residues",
    "CODE_SINGLE_SIDE": "single_side",
    "CODE_USD_CODEWORDS": "usd_codewords",
    "PROTOCOL_VARIANT": "variant",
    "PROTOCOL_M": "m",
    "PROTOCOL_N_S": "n_s",
    "DEVICE_P_M": "p_m",
    "DEVICE_T0": "t0",
    "DEVICE_SIGNAL_SPEED": "signal_speed",
    "DEVICE_ATTENUATION": "attenuation",
    "MEMORY_MODEL": "memory",
    "MEMORY_T_C": "t_c",
}

OPTIMIZE_KEYS: Dict[str, str] = {
    "OPTIMIZE_ALPHA_MIN": "alpha_min",
    "OPTIMIZE_ALPHA_MAX": "alpha_max",
    "OPTIMIZE_ALPHA_POINTS": "alpha_points",
    "OPTIMIZE_M_MAX": "m_max",
    "OPTIMIZE_FREE": "free",
}

OTHER_KEYS = {"SWEEP_OBJECTIVE", "OUTPUT_VERBOSITY"}

Objective = Literal["per_channel_use", "bits_per_second", "cost"]


class OptimizeSettings(BaseModel):
    """Search box for ``optimize`` and the optimizing recipes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha_min: float = Field(0.3, gt=0)
    alpha_max: float = Field(2.5, gt=0)
    alpha_points: int = Field(61, ge=3)
    m_max: int = Field(64, ge=1)
    free: Tuple[Literal["alpha", "m"], ...] = ("alpha", "m")


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, with defaults already merged in."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    protocol: ProtocolConfig
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...] = ()
    objective: Objective = "per_channel_use"
    optimize: OptimizeSettings = OptimizeSettings()
    verbosity: int = Field(0, ge=-1, le=2)

    def provenance(self) -> Dict[str, Any]:
        """Every effective parameter, defaults included, in a stable order."""
        items: Dict[str, Any] = dict(self.protocol.model_dump())
        items["objective"] = self.objective
        for name, value in self.optimize.model_dump().items():
            items[f"optimize.{name}"] = value
        for name, grid in self.axes:
            items[f"axis.{name}"] = list(grid)
        return items


def parse_grid(key: str, text: str) -> Tuple[float, ...]:
    """Parse ``start:stop:count`` or ``v1,v2,...`` into a tuple of floats."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            values = np.linspace(float(start), float(stop), int(count))
            return tuple(float(v) for v in values)
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse grid {text!r}", key=key) from exc


def _parse_value(key: str, field_name: str, text: str) -> Any:
    if field_name == "residues":
        try:
            return tuple(int(v) for v in text.split(","))
        except ValueError as exc:
            raise ConfigError(f"{key}: residues must be integers, got {text!r}", key=key) from exc
    if field_name == "free":
        return tuple(v.strip() for v in text.split(",") if v.strip())
    if field_name in {"t_c", "n_s"} and text.strip().lower() in {"", "none", "null"}:
        return None
    return text.strip()


def load_run_config(path: Optional[str], config: Optional[Config] = None) -> RunConfig:
    """Parse a run file into a validated ``RunConfig``.

    Parameters
    ----------
    path:
        Path to a ``KEY=value`` file, or ``None`` for environment defaults only.
    config:
        Environment configuration supplying physical defaults.

    Returns
    -------
    RunConfig
        Validated run configuration.

    Raises
    ------
    ConfigError
        Missing file, unknown key, unparseable or invalid value.  The message
        names the offending key.
    """
    config = config or Config.from_env()
    raw: Dict[str, Optional[str]] = {}
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        raw = dict(dotenv_values(path))

    protocol: Dict[str, Any] = dict(config.protocol_defaults())
    optimize: Dict[str, Any] = {"m_max": config.m_max}
    axes: List[Tuple[str, Tuple[float, ...]]] = []
    extra: Dict[str, Any] = {}
    key_of_field: Dict[str, str] = {}

    for key, value in raw.items():
        key_upper = key.upper()
        text = "" if value is None else value
        if key_upper in PROTOCOL_KEYS:
            name = PROTOCOL_KEYS[key_upper]
            protocol[name] = _parse_value(key_upper, name, text)
            key_of_field[name] = key_upper
        elif key_upper in OPTIMIZE_KEYS:
            name = OPTIMIZE_KEYS[key_upper]
            optimize[name] = _parse_value(key_upper, name, text)
            key_of_field[name] = key_upper
        elif key_upper == "SWEEP_OBJECTIVE":
            extra["objective"] = text.strip()
            key_of_field["objective"] = key_upper
        elif key_upper == "OUTPUT_VERBOSITY":
            extra["verbosity"] = text.strip()
            key_of_field["verbosity"] = key_upper
        elif key_upper.startswith("SWEEP_"):
            axis = key_upper[len("SWEEP_"):].lower()
            axes.append((axis, parse_grid(key_upper, text)))
            key_of_field[axis] = key_upper
        else:
            raise ConfigError(f"unknown config key: {key}", key=key)

    try:
        run = RunConfig(
            protocol=ProtocolConfig(**protocol),
            axes=tuple(axes),
            optimize=OptimizeSettings(**optimize),
            **extra,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = [str(part) for part in first.get("loc", ())]
        offending = next((key_of_field[p] for p in reversed(loc) if p in key_of_field), None)
        label = offending or ".".join(loc) or "config"
        raise ConfigError(f"{label}: {first.get('msg', 'invalid value')}", key=offending) from exc

    # Axis names are checked against the explorer's vocabulary up front.
    from .tools.explorer import check_axis_name

    for name, grid in run.axes:
        check_axis_name(name, key_of_field.get(name))
        if not grid:
            raise ConfigError(f"{key_of_field[name]}: empty grid", key=key_of_field[name])
    return run
