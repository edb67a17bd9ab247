"""
catrepeater/tools/explorer.py
=============================

Sweeps, optimization, threshold finding and cost-target solving on top of
``catrepeater.core.rate_model``.

Design Strategy
---------------
Every objective is a cheap closed form, so the explorer is exhaustive and
deterministic:

- ``sweep`` walks the Cartesian product of its axes in declaration order
  and returns one pandas row per point.
- ``optimize`` scores a full (α, m) grid, then runs one bounded scalar
  refinement on α for ``m*-1, m*, m*+1``.  It never returns a point that
  scores below the best grid point.
- ``find_threshold`` and ``solve_cost_target`` bracket a sign change and
  bisect it with ``scipy.optimize.bisect``.

Why log objectives?
-------------------
Rates at long distances underflow double precision long before they stop
mattering for a comparison.  All internal comparisons use ``log10`` of the
objective, taken from the report's log fields, and ``-inf`` stands for an
exactly zero rate.
"""

import logging
import math
from dataclasses import dataclass, fields
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError
from scipy.optimize import bisect, minimize_scalar

from ..core.rate_model import ProtocolConfig, RateReport, skr
from ..errors import ConfigError, NoCrossingError

logger = logging.getLogger(__name__)

SWEEPABLE = ("l_tot", "l0", "m", "alpha", "loss_order", "p_m", "t0", "signal_speed", "attenuation", "t_c", "n_s")
INTEGER_FIELDS = {"m", "loss_order"}
ALIASES = {"measurement_error": "p_m"}
OBJECTIVES = ("per_channel_use", "bits_per_second", "cost")

REPORT_COLUMNS = [f.name for f in fields(RateReport)]

TIE_TOLERANCE = 1e-12
PENALTY = 1e6
"""Stand-in for ``-inf`` log objectives inside the scalar refinement."""


# ── Parameter plumbing ────────────────────────────────────────────────────────


def check_axis_name(name: str, key: Optional[str] = None) -> None:
    """Raise ``ConfigError`` unless ``name`` can be swept."""
    if name not in SWEEPABLE and name not in ALIASES:
        known = ", ".join(sorted(SWEEPABLE + tuple(ALIASES)))
        raise ConfigError(f"{key or name}: unknown sweep axis {name!r} (known: {known})", key=key)


def with_parameters(config: ProtocolConfig, updates: Dict[str, Any]) -> ProtocolConfig:
    """Validated copy of ``config`` with ``updates`` applied.

    ``measurement_error`` sets ``p_m = 1 - value``.
    """
    values = config.model_dump()
    for name, value in updates.items():
        check_axis_name(name)
        if name in ALIASES:
            values[ALIASES[name]] = 1.0 - float(value)
        elif name in INTEGER_FIELDS:
            values[name] = int(round(float(value)))
        else:
            values[name] = value
    try:
        return ProtocolConfig.model_validate(values)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(f"invalid parameter point {updates}: {first.get('msg')}") from exc


def objective_value(report: RateReport, objective: str) -> float:
    """Objective on its natural scale (cost is reported as C')."""
    if objective == "per_channel_use":
        return report.r_per_channel_use
    if objective == "bits_per_second":
        return report.r_qkd
    if objective == "cost":
        return report.cost_per_km
    raise ConfigError(f"unknown objective {objective!r}")


def log_objective(report: RateReport, objective: str, config: Optional[ProtocolConfig] = None) -> float:
    """``log10`` of a quantity to maximize; ``-inf`` for a zero rate.

    For ``cost`` this is ``-log10 C'`` so that larger is still better.
    """
    if objective == "per_channel_use":
        return report.log10_r_qkd + math.log10(report.t_r) - math.log10(report.m)
    if objective == "bits_per_second":
        return report.log10_r_qkd
    if objective == "cost":
        if config is None or config.n_s is None:
            raise ConfigError("the cost objective needs n_s")
        return -(math.log10(config.n_s) - report.log10_r_qkd - math.log10(config.l0))
    raise ConfigError(f"unknown objective {objective!r}")


# ── Sweeps ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SweepSpec:
    """A base configuration and the axes to sweep it over."""

    base: ProtocolConfig
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...]
    objective: str = "per_channel_use"

    def __post_init__(self) -> None:
        if not self.axes:
            raise ConfigError("a sweep needs at least one axis")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}")
        for name, grid in self.axes:
            check_axis_name(name)
            values = np.asarray(grid, dtype=float)
            if values.size == 0 or not np.all(np.isfinite(values)):
                raise ConfigError(f"axis {name!r} needs a finite, non-empty grid")
            if np.any(np.diff(values) < 0.0):
                raise ConfigError(f"axis {name!r} grid must be sorted ascending")


def sweep(spec: SweepSpec) -> pd.DataFrame:
    """One row per grid point, in Cartesian order of the axes.

    Columns are the axis names, every ``RateReport`` field, then
    ``objective``.
    """
    names = [name for name, _ in spec.axes]
    rows: List[Dict[str, Any]] = []
    for point in product(*(grid for _, grid in spec.axes)):
        updates = dict(zip(names, point))
        config = with_parameters(spec.base, updates)
        report = skr(config)
        row: Dict[str, Any] = {name: (int(round(v)) if name in INTEGER_FIELDS else float(v)) for name, v in updates.items()}
        row.update(report.as_row())
        row["objective"] = objective_value(report, spec.objective)
        rows.append(row)
    logger.info("swept %d points over %s", len(rows), names)
    return pd.DataFrame(rows, columns=names + [c for c in REPORT_COLUMNS if c not in names] + ["objective"])


# ── Optimization ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class OptimizationResult:
    alpha: float
    m: int
    score: float
    """``log10`` objective at the optimum (see ``log_objective``)."""
    report: RateReport
    config: ProtocolConfig
    evaluations: int

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"best_alpha": self.alpha, "best_m": self.m, "log10_objective": self.score}
        row.update(self.report.as_row())
        return row


def _at(config: ProtocolConfig, alpha: float, m: int) -> ProtocolConfig:
    # grid points are in range by construction
    return config.model_copy(update={"alpha": float(alpha), "m": int(m)})


def _score(config: ProtocolConfig, objective: str) -> Tuple[float, RateReport]:
    report = skr(config)
    return log_objective(report, objective, config), report


def optimize(
    config: ProtocolConfig,
    free: Sequence[str] = ("alpha", "m"),
    alpha_bounds: Tuple[float, float] = (0.3, 2.5),
    alpha_points: int = 61,
    m_max: int = 64,
    objective: str = "per_channel_use",
) -> OptimizationResult:
    """Maximize the objective over the free parameters.

    Ties within ``1e-12`` (in log10) go to the smaller ``m``, then the
    smaller ``alpha``.

    Raises
    ------
    ConfigError
        Empty search box or unknown free parameter.
    """
    unknown = set(free) - {"alpha", "m"}
    if unknown:
        raise ConfigError(f"cannot optimize over {sorted(unknown)}; free parameters are alpha and m")
    lo, hi = alpha_bounds
    if "alpha" in free and not (0.0 < lo < hi and alpha_points >= 2):
        raise ConfigError(f"empty alpha search box {alpha_bounds} with {alpha_points} points")
    if m_max < 1:
        raise ConfigError("m_max must be at least 1")

    alphas = np.linspace(lo, hi, alpha_points) if "alpha" in free else np.array([config.alpha])
    averaged = config.variant == "single_channel_avg"
    ms = list(range(1, m_max + 1)) if "m" in free and not averaged else [config.m]

    scores = np.full((len(ms), len(alphas)), -math.inf)
    best: Optional[Tuple[float, int, float]] = None
    evaluations = 0
    for i, m in enumerate(ms):
        for j, alpha in enumerate(alphas):
            score, _ = _score(_at(config, alpha, m), objective)
            scores[i, j] = score
            evaluations += 1
            if best is None or score > best[2] + TIE_TOLERANCE:
                best = (float(alpha), m, score)

    assert best is not None
    if "alpha" in free and len(alphas) >= 3 and best[2] > -math.inf:
        best_index = ms.index(best[1])
        for i in sorted({max(best_index - 1, 0), best_index, min(best_index + 1, len(ms) - 1)}):
            m = ms[i]
            j = int(np.argmax(scores[i]))
            left, right = alphas[max(j - 1, 0)], alphas[min(j + 1, len(alphas) - 1)]

            def negative(alpha: float, m: int = m) -> float:
                score, _ = _score(_at(config, alpha, m), objective)
                return -score if math.isfinite(score) else PENALTY

            refined = minimize_scalar(negative, bounds=(left, right), method="bounded", options={"xatol": 1e-10})
            evaluations += int(refined.nfev)
            candidate = -float(refined.fun)
            if candidate > best[2] + TIE_TOLERANCE:
                best = (float(refined.x), m, candidate)

    alpha, m, score = best
    best_config = with_parameters(config, {"alpha": alpha, "m": m})
    report = skr(best_config)
    logger.info("optimum alpha=%.6f m=%d log10 objective %.6f (%d evaluations)", alpha, m, score, evaluations)
    return OptimizationResult(alpha, m, score, report, best_config, evaluations)


# ── Thresholds and cost targets ───────────────────────────────────────────────


@dataclass(frozen=True)
class ThresholdResult:
    parameter: str
    value: float
    score_a: float
    score_b: float
    evaluations: int


def _side_score(config: ProtocolConfig, objective: str, optimize_over: Optional[Dict[str, Any]]) -> float:
    if optimize_over is None:
        return _score(config, objective)[0]
    return optimize(config, objective=objective, **optimize_over).score


def find_threshold(
    config_a: ProtocolConfig,
    config_b: ProtocolConfig,
    parameter: str,
    bracket: Tuple[float, float],
    objective: str = "bits_per_second",
    rtol: float = 1e-3,
    optimize_over: Optional[Dict[str, Any]] = None,
) -> ThresholdResult:
    """Value of ``parameter`` at which the two configurations score equally.

    Parameters
    ----------
    config_a, config_b:
        The two setups being compared.
    parameter:
        Sweepable parameter scanned on both sides (e.g. ``measurement_error``).
    bracket:
        ``(lo, hi)`` in which the score difference must change sign.
    optimize_over:
        When given, each side is re-optimized at every scanned value with
        these ``optimize`` keyword arguments.

    Raises
    ------
    NoCrossingError
        No sign change in the bracket, including identical configurations
        and both rates vanishing.
    """
    check_axis_name(parameter)
    calls = 0

    def difference(x: float) -> float:
        nonlocal calls
        calls += 1
        a = _side_score(with_parameters(config_a, {parameter: x}), objective, optimize_over)
        b = _side_score(with_parameters(config_b, {parameter: x}), objective, optimize_over)
        if a == b:
            return 0.0
        return a - b

    lo, hi = bracket
    f_lo, f_hi = difference(lo), difference(hi)
    if not (np.isfinite(f_lo) or np.isfinite(f_hi)) or np.isnan(f_lo) or np.isnan(f_hi):
        raise NoCrossingError(f"scores are undefined at the ends of {bracket} for {parameter}")
    if f_lo == 0.0 or f_hi == 0.0 or np.sign(f_lo) == np.sign(f_hi):
        raise NoCrossingError(f"no sign change of the score difference over {parameter} in {bracket}")

    value = bisect(difference, lo, hi, rtol=rtol, xtol=1e-300)
    score_a = _side_score(with_parameters(config_a, {parameter: value}), objective, optimize_over)
    score_b = _side_score(with_parameters(config_b, {parameter: value}), objective, optimize_over)
    logger.info("threshold %s=%.6g (log10 scores %.6f vs %.6f)", parameter, value, score_a, score_b)
    return ThresholdResult(parameter, float(value), score_a, score_b, calls)


@dataclass(frozen=True)
class CostSolution:
    l0: float
    n_s: float
    cost_per_km: float
    report: RateReport


def best_rate_log10(config: ProtocolConfig, optimize_over: Optional[Dict[str, Any]] = None) -> Tuple[float, RateReport]:
    """``log10`` of the (optionally optimized) key rate in bits/s."""
    if optimize_over is None:
        report = skr(config)
        return report.log10_r_qkd, report
    result = optimize(config, objective="bits_per_second", **optimize_over)
    return result.score, result.report


def calibrate_n_s(
    config: ProtocolConfig, l0: float, target: float, optimize_over: Optional[Dict[str, Any]] = None
) -> float:
    """``N_s`` for which the chain meets ``C' = target`` at elementary distance ``l0``."""
    at_l0 = with_parameters(config.model_copy(update={"fractional_links": True}), {"l0": l0})
    log_rate, _ = best_rate_log10(at_l0, optimize_over)
    if not math.isfinite(log_rate):
        raise NoCrossingError(f"zero key rate at l0={l0} km; cannot calibrate N_s")
    return float(target * 10.0**log_rate * l0)


def solve_cost_target(
    config: ProtocolConfig,
    target: float,
    bracket: Tuple[float, float] = (0.2, 20.0),
    rtol: float = 1e-3,
    optimize_over: Optional[Dict[str, Any]] = None,
) -> CostSolution:
    """Elementary distance at which ``C' = N_s / (R l0)`` equals ``target``.

    The link count ``l_tot / l0`` is allowed to be fractional while solving.

    Raises
    ------
    ConfigError
        ``config.n_s`` is unset.
    NoCrossingError
        ``C'`` does not cross the target inside the bracket.
    """
    if config.n_s is None:
        raise ConfigError("solving a cost target needs n_s")
    base = config.model_copy(update={"fractional_links": True})

    def excess(l0: float) -> float:
        log_rate, _ = best_rate_log10(with_parameters(base, {"l0": l0}), optimize_over)
        if not math.isfinite(log_rate):
            return PENALTY
        return math.log10(config.n_s) - log_rate - math.log10(l0) - math.log10(target)

    lo, hi = bracket
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo * f_hi > 0.0:
        raise NoCrossingError(f"C' does not cross {target} for l0 in {bracket} km")

    l0 = bisect(excess, lo, hi, rtol=rtol)
    log_rate, report = best_rate_log10(with_parameters(base, {"l0": l0}), optimize_over)
    cost_per_km = config.n_s / (10.0**log_rate * l0)
    logger.info("C'=%.4g reached at l0=%.6g km (l_tot=%.6g km)", target, l0, config.l_tot)
    return CostSolution(float(l0), float(config.n_s), float(cost_per_km), report)
