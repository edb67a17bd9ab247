"""
catrepeater/core/cat_codes.py
=============================

The ℓ-loss cat-code family.

Codewords
---------
With ``s = ℓ + 1`` and ``ω = exp(2πi/s)``:

    |0̄> ∝ Σ_r |α ω^r>          |1̄> = R |0̄>,   R = exp(iπ n̂ / s)

Both codewords live on photon numbers ``n ≡ 0 (mod s)``; ``|1̄>`` carries
the phase ``(-1)^(n/s)`` there.  Losing ``k`` photons shifts the support to
``n ≡ -k (mod s)``, so the loss count modulo ``s`` (the syndrome) can be read
without touching the logical information, as long as fewer than ``s``
photons are lost.  For ℓ = 1 these are exactly the two-component cats
``|α> + |-α>`` and ``|iα> + |-iα>``.

Closed forms (ℓ = 1)
--------------------
Every closed form here has a Fock-space counterpart in the same module, and
the test suite holds each pair to ``1e-10``:

    <0̄|1̄>                  = cos α² / cosh α²
    P(even losses)          = cosh ηα² cosh (1-η)α² / cosh α²
    USD on damped, even     = 1 - |cos ηα²| / cosh ηα²
    USD on damped, odd      = 1 - |sin ηα²| / sinh ηα²

``series_coefficients`` returns the amplitudes ``‖A_k|0̄>‖`` for even and
odd ``k``.  The odd coefficient uses ``√((2m+1)!)``; with ``√((2m)!)`` the
squares would not sum to one.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.special import gammaln, xlogy

from ..errors import NumericDomainError
from .fock import (
    DEFAULT_K_MAX,
    FockState,
    apply_loss_unraveled,
    coherent_state,
    inner_product,
    kraus_loss,
    project_loss_residue,
    truncation_cutoff,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatCode:
    """Cat code with amplitude ``alpha`` detecting up to ``loss_order`` losses."""

    alpha: float
    loss_order: int = 1

    def __post_init__(self) -> None:
        if self.alpha < 0.0 or not np.isfinite(self.alpha):
            raise NumericDomainError(f"cat amplitude must be a non-negative real, got {self.alpha}")
        if int(self.loss_order) != self.loss_order or self.loss_order < 1:
            raise NumericDomainError(f"loss order must be an integer >= 1, got {self.loss_order}")

    @property
    def modulus(self) -> int:
        """Syndrome modulus ``s = ℓ + 1``."""
        return self.loss_order + 1

    @property
    def flip_angle(self) -> float:
        """Rotation angle ``π/s`` that maps ``|0̄>`` to ``|1̄>``."""
        return np.pi / self.modulus

    def cutoff(self, headroom: int = DEFAULT_K_MAX) -> int:
        return truncation_cutoff(self.alpha, headroom)


@dataclass(frozen=True)
class SeriesCoefficients:
    """Loss amplitudes of ``|0̄>`` for ℓ = 1: ``C[m] = ‖A_2m|0̄>‖``, ``D[m] = ‖A_(2m+1)|0̄>‖``."""

    C: Tuple[float, ...]
    D: Tuple[float, ...]
    eta: float
    alpha: float

    def total(self) -> float:
        return float(np.sum(np.square(self.C)) + np.sum(np.square(self.D)))


def codeword(code: CatCode, bit: int, cutoff: Optional[int] = None) -> FockState:
    """Normalized logical codeword ``|bit̄>``."""
    if bit not in (0, 1):
        raise NumericDomainError(f"logical bit must be 0 or 1, got {bit}")
    cutoff = code.cutoff() if cutoff is None else cutoff
    s = code.modulus
    offset = bit * code.flip_angle
    amplitudes = sum(
        coherent_state(code.alpha * np.exp(1j * (2.0 * np.pi * r / s + offset)), cutoff).amplitudes
        for r in range(s)
    )
    return FockState(amplitudes, normalized=False).normalize()


def damped_codeword(
    code: CatCode, bit: int, eta: float, residue: int, cutoff: Optional[int] = None
) -> FockState:
    """``A_j|bit̄>`` normalized: the codeword after losing ``j`` photons.

    Every loss count ``k ≡ j (mod s)`` maps the codeword onto this same ray,
    so it spans the post-loss code space of syndrome class ``j``.

    Raises
    ------
    NumericDomainError
        When the residue class is unreachable (e.g. ``eta = 1``, ``j > 0``).
    """
    cutoff = code.cutoff() if cutoff is None else cutoff
    state = kraus_loss(residue, eta, cutoff).apply(codeword(code, bit, cutoff))
    if state.norm_squared() == 0.0:
        raise NumericDomainError(f"syndrome class {residue} is unreachable at eta={eta}")
    return state.normalize()


def codeword_overlap(code: CatCode, cutoff: Optional[int] = None) -> complex:
    """``<0̄|1̄>`` by Fock-space inner product."""
    return inner_product(codeword(code, 0, cutoff), codeword(code, 1, cutoff))


def overlap_closed_form(alpha: float) -> float:
    """``<0̄|1̄>`` for ℓ = 1."""
    x = alpha**2
    return float(np.cos(x) / np.cosh(x))


def usd_probability(
    code: CatCode,
    eta: Optional[float] = None,
    residue: int = 0,
    cutoff: Optional[int] = None,
) -> float:
    """Optimal USD success ``1 - |<0|1>|`` for a pair of codewords.

    With ``eta`` omitted this is the original codeword pair.  With ``eta``
    given it is the damped pair of syndrome class ``residue``.
    """
    if eta is None:
        overlap = codeword_overlap(code, cutoff)
    else:
        overlap = inner_product(
            damped_codeword(code, 0, eta, residue, cutoff), damped_codeword(code, 1, eta, residue, cutoff)
        )
    return float(min(max(1.0 - abs(overlap), 0.0), 1.0))


def damped_usd_closed_form(alpha: float, eta: float, residue: int) -> float:
    """Damped-codeword USD success for ℓ = 1."""
    x = eta * alpha**2
    if x == 0.0:
        return 0.0
    if residue == 0:
        return float(1.0 - abs(np.cos(x)) / np.cosh(x))
    return float(1.0 - abs(np.sin(x)) / np.sinh(x))


def syndrome_class_probability(
    code: CatCode,
    eta: float,
    residue: int,
    bit: Optional[int] = None,
    cutoff: Optional[int] = None,
    k_max: int = DEFAULT_K_MAX,
) -> float:
    """Probability that the codeword loses ``n ≡ residue (mod s)`` photons.

    Computed by trajectory enumeration.  ``bit=None`` averages the two
    codewords uniformly.  Zero at ``eta = 1`` for every non-zero residue.
    """
    if not 0 <= residue < code.modulus:
        raise NumericDomainError(f"residue {residue} outside 0..{code.modulus - 1}")
    cutoff = code.cutoff() if cutoff is None else cutoff
    bits = (0, 1) if bit is None else (bit,)
    probabilities = []
    for b in bits:
        ensemble = apply_loss_unraveled(codeword(code, b, cutoff), 0, eta, k_max)
        _, probability = project_loss_residue(ensemble, 0, code.modulus, residue)
        probabilities.append(probability)
    return float(np.mean(probabilities))


def syndrome_probability_closed_form(alpha: float, eta: float, residue: int) -> float:
    """``cosh ηα² cosh (1-η)α² / cosh α²`` (even) and its sinh partner (odd), for ℓ = 1.

    Written through ``tanh`` so large amplitudes do not overflow.
    """
    product = np.tanh(eta * alpha**2) * np.tanh((1.0 - eta) * alpha**2)
    even = 1.0 / (1.0 + product)
    return float(even if residue == 0 else 1.0 - even)


def series_coefficients(
    alpha: float, eta: float, m_max: int = 40, loss_order: int = 1
) -> SeriesCoefficients:
    """Even and odd loss amplitudes of ``|0̄>`` for ℓ = 1.

    ``C_m = √(cosh ηα² / cosh α²) (√(1-η) α)^(2m) / √((2m)!)``
    ``D_m = √(sinh ηα² / cosh α²) (√(1-η) α)^(2m+1) / √((2m+1)!)``

    Raises
    ------
    NumericDomainError
        For any loss order other than 1.
    """
    if loss_order != 1:
        raise NumericDomainError("series coefficients are defined for the 1-loss code only")
    if not 0.0 <= eta <= 1.0:
        raise NumericDomainError(f"transmittance must lie in [0, 1], got {eta}")
    x = alpha**2
    beta = (1.0 - eta) * x
    m = np.arange(m_max + 1)
    # log of the cosh/sinh prefactors, stable for large x
    log_even = 0.5 * (np.logaddexp(eta * x, -eta * x) - np.logaddexp(x, -x))
    even = np.exp(log_even + 0.5 * xlogy(2 * m, beta) - 0.5 * gammaln(2 * m + 1))
    if eta * x == 0.0:
        odd = np.zeros_like(even)
    else:
        log_odd = 0.5 * (np.log(-np.expm1(-2.0 * eta * x)) + eta * x - np.logaddexp(x, -x))
        odd = np.exp(log_odd + 0.5 * xlogy(2 * m + 1, beta) - 0.5 * gammaln(2 * m + 2))
    return SeriesCoefficients(C=tuple(float(v) for v in even), D=tuple(float(v) for v in odd), eta=eta, alpha=alpha)


@lru_cache(maxsize=512)
def loss_amplitudes(alpha: float, loss_order: int, eta: float, cutoff: int) -> Tuple[float, ...]:
    """``‖A_k|0̄>‖`` for ``k = 0..cutoff`` by direct Kraus application."""
    code = CatCode(alpha, loss_order)
    zero = codeword(code, 0, cutoff)
    return tuple(float(np.sqrt(kraus_loss(k, eta, cutoff).apply(zero).norm_squared())) for k in range(cutoff + 1))
