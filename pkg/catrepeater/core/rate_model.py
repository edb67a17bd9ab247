"""
catrepeater/core/rate_model.py
==============================

Closed-form secret-key-rate model of a multiplexed cat-code repeater chain.

A chain of length ``l_tot`` is cut into ``n = l_tot / l0`` elementary
links, each run over ``m`` parallel channels.  The chain succeeds when every
link finds at least one channel with the desired syndrome (``P_tdsm``), and
every readout and swap succeeds (``P_tz``).  The surviving pair carries
phase-flip noise from loss (``F_tot``).  In the quantum-memory variant it
also carries memory decoherence accumulated while the heralds travel.

Variants
--------
``qm``
    Quantum memories hold each link while classical heralds travel, so one
    round takes ``max(t0, 2 l0 / c)``.  Readout exponent ``k_m = n``.
``graph``
    Photonic graph states remove the wait, so one round takes ``t0``.  Every
    channel is read out: ``k_m = n m``.
``single_channel_avg``
    One channel, every syndrome accepted; the phase-flip parameter is
    averaged over all residue pairs.

Numbers spanning dozens of decades are normal here (``P_tot`` reaches
``1e-300`` at long distances), so ``RateReport`` carries ``log10`` versions
of the probabilities and rates, and the optimizer works on those.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import NumericDomainError, ZeroRateError
from .link_model import DEFAULT_ATTENUATION, LinkOutcome, LinkParams, link_factorized

logger = logging.getLogger(__name__)

DEFAULT_SIGNAL_SPEED = 2e8
"""Signal speed in fibre, m/s."""

DEFAULT_T0 = 1e-6
"""Light-matter interaction time, s."""

LINK_COUNT_TOLERANCE = 1e-9
PROBABILITY_SLACK = 1e-12

Variant = Literal["qm", "graph", "single_channel_avg"]
MemoryModel = Literal["none", "depolarizing", "dephasing"]


class ProtocolConfig(BaseModel):
    """Every parameter of one repeater-chain evaluation.

    Lengths are in km, times in s, the signal speed in m/s and attenuation
    in dB/km.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    l_tot: float = Field(1000.0, gt=0)
    l0: float = Field(1.0, gt=0)
    m: int = Field(1, ge=1)
    alpha: float = Field(1.268, ge=0)
    loss_order: int = Field(1, ge=1)
    p_m: float = Field(1.0, ge=0, le=1)
    t0: float = Field(DEFAULT_T0, gt=0)
    signal_speed: float = Field(DEFAULT_SIGNAL_SPEED, gt=0)
    attenuation: float = Field(DEFAULT_ATTENUATION, ge=0)
    memory: MemoryModel = "none"
    t_c: Optional[float] = Field(None, gt=0)
    variant: Variant = "qm"
    residues: Tuple[int, int] = (0, 0)
    single_side: bool = False
    usd_codewords: Literal["damped", "original"] = "damped"
    fractional_links: bool = False
    n_s: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ProtocolConfig":
        if self.l0 > self.l_tot * (1.0 + LINK_COUNT_TOLERANCE):
            raise ValueError(f"l0={self.l0} km exceeds l_tot={self.l_tot} km")
        ratio = self.l_tot / self.l0
        if not self.fractional_links and abs(ratio - round(ratio)) * self.l0 > LINK_COUNT_TOLERANCE:
            raise ValueError(f"l_tot={self.l_tot} km is not a whole number of l0={self.l0} km links")
        if self.memory != "none" and self.t_c is None:
            raise ValueError(f"memory model {self.memory!r} needs a coherence time t_c")
        if not all(0 <= j <= self.loss_order for j in self.residues):
            raise ValueError(f"residues {self.residues} invalid for loss order {self.loss_order}")
        return self

    @property
    def n_links(self) -> float:
        ratio = self.l_tot / self.l0
        return ratio if self.fractional_links else float(round(ratio))

    def link_params(self) -> LinkParams:
        return LinkParams(
            alpha=self.alpha,
            loss_order=self.loss_order,
            l0=self.l0,
            attenuation=self.attenuation,
            desired=(tuple(self.residues),),
            single_side=self.single_side,
            usd_codewords=self.usd_codewords,
        )


@dataclass(frozen=True)
class RateReport:
    """Every intermediate and final quantity of one rate evaluation."""

    n: float
    m: int
    alpha: float
    p_dsm: float
    p_tdsm: float
    p_usd: float
    p_tz: float
    log10_p_tz: float
    p_tot: float
    log10_p_tot: float
    t_r: float
    f0: float
    f_tot: float
    p_memory: float
    e_x: float
    e_z: float
    r_raw: float
    r_inf: float
    r_qkd: float
    log10_r_qkd: float
    r_nqkd: float
    r_per_channel_use: float
    cost: float
    cost_per_km: float

    def as_row(self) -> Dict[str, float]:
        return asdict(self)


# ── Elementary formulas ───────────────────────────────────────────────────────


def _check_probability(name: str, p: float) -> float:
    if not -PROBABILITY_SLACK <= p <= 1.0 + PROBABILITY_SLACK:
        raise NumericDomainError(f"{name} must lie in [0, 1], got {p}")
    return min(max(float(p), 0.0), 1.0)


def binary_entropy(p: float) -> float:
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``."""
    p = _check_probability("binary entropy argument", p)
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def log_p_tdsm(p_dsm: float, m: int, n: float) -> float:
    """Natural log of ``P_tdsm``; ``-inf`` when it vanishes."""
    p_dsm = _check_probability("P_dsm", p_dsm)
    if m < 1 or n <= 0:
        raise NumericDomainError(f"need m >= 1 and n > 0, got m={m}, n={n}")
    if p_dsm == 0.0:
        return -math.inf
    miss_all = math.exp(m * math.log1p(-p_dsm)) if p_dsm < 1.0 else 0.0
    if miss_all >= 1.0:
        return -math.inf
    return n * math.log1p(-miss_all)


def p_tdsm(p_dsm: float, m: int, n: float) -> float:
    """``[1 - (1 - P_dsm)^m]^n``: every link has a desired channel."""
    return math.exp(log_p_tdsm(p_dsm, m, n))


def log_p_tz(p_usd: float, p_m: float, k_m: float) -> float:
    base = _check_probability("P_USD", p_usd) * _check_probability("p_m", p_m)
    if base == 0.0:
        return -math.inf
    return k_m * math.log(base)


def p_tz(p_usd: float, p_m: float, k_m: float) -> float:
    """``(P_USD p_m)^k_m``: every readout and swap succeeds."""
    return math.exp(log_p_tz(p_usd, p_m, k_m))


def readout_exponent(variant: Variant, n: float, m: int) -> float:
    """``k_m``: ``n`` with memories, ``n m`` with graph states."""
    return n * m if variant == "graph" else n


def repetition_time(variant: Variant, t0: float, l0: float, signal_speed: float) -> float:
    """Seconds per round; ``l0`` in km, ``signal_speed`` in m/s."""
    if t0 <= 0.0 or l0 <= 0.0 or signal_speed <= 0.0:
        raise NumericDomainError("repetition time needs positive t0, l0 and signal speed")
    if variant == "qm":
        return max(t0, 2.0 * l0 * 1e3 / signal_speed)
    return t0


def memory_error_prob(t_w: float, t_c: Optional[float]) -> float:
    """``1 - exp(-t_w / t_c)``: error probability after waiting ``t_w``."""
    if t_w < 0.0:
        raise NumericDomainError(f"wait time must be non-negative, got {t_w}")
    if t_c is None or math.isinf(t_c):
        return 0.0
    if t_c <= 0.0:
        raise NumericDomainError(f"coherence time must be positive, got {t_c}")
    return float(-math.expm1(-t_w / t_c))


def _power(base: float, n: float) -> float:
    if base < 0.0 and float(n) != int(n):
        raise NumericDomainError(f"negative base {base} raised to fractional link count {n}")
    return float(np.power(base, n))


def swapped_fidelity(f0: float, n: float) -> float:
    """``[1 + (2F0 - 1)^n] / 2`` after ``n - 1`` ideal swaps."""
    return 0.5 * (1.0 + _power(2.0 * f0 - 1.0, n))


def qber_depolarizing(f0: float, n: float, p: float) -> Tuple[float, float]:
    """QBERs after ``n`` links, each memory depolarized with probability ``p``."""
    survive = _power(1.0 - p, n)
    e_x = 0.5 * ((1.0 - _power(2.0 * f0 - 1.0, n)) * survive + 1.0 - survive)
    e_z = 0.5 * (1.0 - survive)
    return e_x, e_z


def qber_dephasing(f0: float, n: float, p: float) -> Tuple[float, float]:
    """QBERs after ``n`` links, each memory dephased with probability ``p``."""
    e_x = 0.5 * (1.0 - _power(1.0 - 2.0 * p, n) * _power(2.0 * f0 - 1.0, n))
    return e_x, 0.0


def cost_coefficient(config: ProtocolConfig, r_qkd: float, n_s: float) -> Tuple[float, float]:
    """``(C, C')`` with ``C = N_s L_tot / (R L0)`` and ``C' = N_s / (R L0)``.

    Raises
    ------
    ZeroRateError
        When ``r_qkd`` is not positive.
    """
    if not r_qkd > 0.0:
        raise ZeroRateError("cost coefficient is undefined at zero key rate")
    per_km = n_s / (r_qkd * config.l0)
    return per_km * config.l_tot, per_km


# ── Full evaluation ───────────────────────────────────────────────────────────


def skr(config: ProtocolConfig, link: Optional[LinkOutcome] = None) -> RateReport:
    """Assemble the complete rate report for ``config``.

    Parameters
    ----------
    config:
        Chain parameters.
    link:
        Link table to use; defaults to the factorized table for
        ``config.link_params()``.

    Returns
    -------
    RateReport
        Report with ``r_inf`` clamped at zero; ``r_raw`` keeps the sign.
    """
    link = link_factorized(config.link_params()) if link is None else link
    n = config.n_links
    averaged = config.variant == "single_channel_avg"
    m = 1 if averaged else config.m

    if averaged:
        p_dsm_value = 1.0
        phase = link.phase_parameter
        f0 = 0.5 * (1.0 + phase)
        p_usd = link.average_usd
    else:
        p_dsm_value = link.p_dsm
        f0 = link.f0
        p_usd = link.p_usd

    ln_tdsm = log_p_tdsm(p_dsm_value, m, n)
    ln_tz = log_p_tz(p_usd, config.p_m, readout_exponent(config.variant, n, m))
    ln_tot = ln_tdsm + ln_tz
    t_r = repetition_time(config.variant, config.t0, config.l0, config.signal_speed)

    f0 = 0.5 if math.isnan(f0) else f0
    f_tot = swapped_fidelity(f0, n)
    p_memory = 0.0
    if config.variant == "qm" and config.memory != "none":
        p_memory = memory_error_prob(2.0 * config.l0 * 1e3 / config.signal_speed, config.t_c)
        qber = qber_depolarizing if config.memory == "depolarizing" else qber_dephasing
        e_x, e_z = qber(f0, n, p_memory)
    else:
        e_x, e_z = 1.0 - f_tot, 0.0
    e_x = min(max(e_x, 0.0), 1.0)
    e_z = min(max(e_z, 0.0), 1.0)

    r_raw = 1.0 - binary_entropy(e_z) - binary_entropy(e_x)
    r_inf = max(0.0, r_raw)
    if r_inf == 0.0:
        logger.warning("secret fraction clamped to zero (raw %.6g) at alpha=%.6g m=%d", r_raw, config.alpha, m)

    p_tot = math.exp(ln_tot)
    r_qkd = p_tot * r_inf / t_r
    if r_inf > 0.0 and ln_tot > -math.inf:
        log10_r = (ln_tot + math.log(r_inf) - math.log(t_r)) / math.log(10.0)
    else:
        log10_r = -math.inf
    r_nqkd = r_qkd / m

    cost, cost_per_km = math.nan, math.nan
    if config.n_s is not None and r_qkd > 0.0:
        cost, cost_per_km = cost_coefficient(config, r_qkd, config.n_s)

    return RateReport(
        n=n,
        m=m,
        alpha=config.alpha,
        p_dsm=p_dsm_value,
        p_tdsm=math.exp(ln_tdsm),
        p_usd=p_usd,
        p_tz=math.exp(ln_tz),
        log10_p_tz=ln_tz / math.log(10.0),
        p_tot=p_tot,
        log10_p_tot=ln_tot / math.log(10.0),
        t_r=t_r,
        f0=f0,
        f_tot=f_tot,
        p_memory=p_memory,
        e_x=e_x,
        e_z=e_z,
        r_raw=r_raw,
        r_inf=r_inf,
        r_qkd=r_qkd,
        log10_r_qkd=log10_r,
        r_nqkd=r_nqkd,
        r_per_channel_use=t_r * r_nqkd,
        cost=cost,
        cost_per_km=cost_per_km,
    )
