"""
catrepeater/core/link_model.py
==============================

One elementary link, end to end.

Each end station holds a matter qubit entangled with a cat-encoded light
mode, ``(|↑>|0̄> + |↓>|1̄>)/√2``.  The two light modes travel half the link
each (transmittance ``eta`` per half), lose photons, have their loss
residue measured, and are read out onto fresh matter qubits at the
receiving stations through a controlled logical flip followed by USD on the
damped codewords.  What comes out is a table indexed by the residue pair
``(j_left, j_right)``:

- the probability of that pair;
- the conditional two-qubit fidelity to the target once the deterministic
  Pauli frame is applied;
- the USD success probability of the readout.

Two ways to the same table
--------------------------
``link_oracle`` runs the whole pipeline in truncated Fock space with
Kraus-unravelled loss.  It is exact up to truncation and slow.

``link_factorized`` builds the table from single-mode half-link profiles:
the residue probabilities ``P_j``, the fidelities
``f_j = Σ_{q even} g²_{j+sq} / Σ_q g²_{j+sq}`` (with ``g_k = ‖A_k|0̄>‖``) and
the USD success on each damped pair.  For ℓ = 1 every profile entry has a
closed form.  The rate model consumes this path.  Both paths agree on the
fidelities conditioned on residues; the oracle's pair probabilities also
carry the interference of the entangled input, whereas the factorized ones
average the two codewords.

Pauli frame
-----------
Losing ``k = j + s q`` photons multiplies the ``|1̄>`` branch by
``exp(iπk/s)``.  The readout absorbs the ``q = 0`` phase and the USD
outcome's bit flip into a ``FrameCorrection``.  What remains is ``Z^q``,
which is exactly the error ``f_j`` counts.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import NumericDomainError
from .cat_codes import (
    CatCode,
    SeriesCoefficients,
    codeword,
    damped_codeword,
    damped_usd_closed_form,
    loss_amplitudes,
    overlap_closed_form,
    series_coefficients,
    syndrome_probability_closed_form,
    usd_probability,
)
from .fock import (
    DEFAULT_K_MAX,
    FockState,
    USDMeasurement,
    WeightedEnsemble,
    apply_loss_unraveled,
    entangle_and_read,
    partial_trace,
    phase_rotation,
    project_loss_residue,
    truncation_cutoff,
    usd_povm,
)

logger = logging.getLogger(__name__)

DEFAULT_ATTENUATION = 0.2
"""Fibre attenuation in dB/km."""

BELL_TARGET = np.eye(2) / np.sqrt(2.0)
"""Logical amplitudes ``c[b_left, b_right]`` of ``|Φ+>``."""

GRAPH_PAIR_TARGET = np.array([[1.0, 1.0], [1.0, -1.0]]) / 2.0
"""Logical amplitudes of the two-node graph state ``|00>+|01>+|10>-|11>``."""

ResiduePair = Tuple[int, int]


@dataclass(frozen=True)
class LinkParams:
    """Parameters of one elementary link.

    ``eta`` is the transmittance of each half link,
    ``10^(-attenuation · (l0/2) / 10)``, unless ``transmittance`` pins it.
    """

    alpha: float
    loss_order: int = 1
    l0: float = 1.0
    attenuation: float = DEFAULT_ATTENUATION
    desired: Tuple[ResiduePair, ...] = ((0, 0),)
    single_side: bool = False
    usd_codewords: Literal["damped", "original"] = "damped"
    transmittance: Optional[float] = None

    def __post_init__(self) -> None:
        if self.l0 <= 0.0:
            raise NumericDomainError(f"elementary distance must be positive, got {self.l0}")
        if self.attenuation < 0.0:
            raise NumericDomainError(f"attenuation must be non-negative, got {self.attenuation}")
        if self.transmittance is not None and not 0.0 < self.transmittance <= 1.0:
            raise NumericDomainError(f"transmittance must lie in (0, 1], got {self.transmittance}")
        if not self.desired:
            raise NumericDomainError("at least one desired residue pair is required")
        s = self.loss_order + 1
        for pair in self.desired:
            if len(pair) != 2 or not all(0 <= j < s for j in pair):
                raise NumericDomainError(f"desired residue pair {pair} invalid for modulus {s}")

    @property
    def code(self) -> CatCode:
        return CatCode(self.alpha, self.loss_order)

    @property
    def eta(self) -> float:
        if self.transmittance is not None:
            return self.transmittance
        return float(10.0 ** (-self.attenuation * (self.l0 / 2.0) / 10.0))


@dataclass(frozen=True)
class FrameCorrection:
    """Deterministic correction for one readout: optional X, then a phase on ``|1>``."""

    x_flip: bool
    phase: float

    def unitary(self) -> np.ndarray:
        flip = np.array([[0, 1], [1, 0]], dtype=complex) if self.x_flip else np.eye(2, dtype=complex)
        return np.diag([1.0, np.exp(-1j * self.phase)]) @ flip


def frame_correction(modulus: int, residue: int, outcome: int) -> FrameCorrection:
    """Frame for readout outcome ``outcome`` of a mode in residue class ``residue``.

    The readout pair is ``(a, R a)`` with ``a = A_j|0̄>`` normalized.  On the
    reference trajectory ``k = j`` the qubit ends in ``(c0, c1 e^{-iπj/s})``
    for outcome 0 and ``X (c0, c1 e^{iπj/s})`` for outcome 1.
    """
    phase = np.pi * residue / modulus
    return FrameCorrection(x_flip=bool(outcome), phase=phase if outcome else -phase)


@dataclass(frozen=True)
class ResidueOutcome:
    """One row of a link table.

    ``frames`` holds the frame pair for USD outcomes
    ``(0,0), (0,1), (1,0), (1,1)`` in that order.
    """

    probability: float
    fidelity: float
    usd_success: float
    frames: Tuple[Tuple[FrameCorrection, FrameCorrection], ...] = ()

    @property
    def reachable(self) -> bool:
        return self.probability > 0.0


@dataclass(frozen=True, eq=False)
class LinkOutcome:
    """Residue-pair table of one link plus the aggregates the rate model reads."""

    params: LinkParams
    outcomes: Mapping[ResiduePair, ResidueOutcome]

    def _rows(self, pairs: Sequence[ResiduePair]):
        return [self.outcomes[p] for p in pairs if self.outcomes[p].reachable]

    @property
    def desired_pairs(self) -> Tuple[ResiduePair, ...]:
        if not self.params.single_side:
            return tuple(self.params.desired)
        left = {pair[0] for pair in self.params.desired}
        return tuple(pair for pair in sorted(self.outcomes) if pair[0] in left)

    @property
    def total_probability(self) -> float:
        return float(sum(row.probability for row in self.outcomes.values()))

    @property
    def p_dsm(self) -> float:
        """Probability that the link shows a desired syndrome."""
        return float(sum(row.probability for row in self._rows(self.desired_pairs)))

    @property
    def f0(self) -> float:
        """Fidelity conditioned on a desired syndrome."""
        rows = self._rows(self.desired_pairs)
        total = sum(row.probability for row in rows)
        if total == 0.0:
            return float("nan")
        return float(sum(row.probability * row.fidelity for row in rows) / total)

    @property
    def p_usd(self) -> float:
        """Readout success conditioned on a desired syndrome."""
        rows = self._rows(self.desired_pairs)
        total = sum(row.probability for row in rows)
        if total == 0.0:
            return 0.0
        return float(sum(row.probability * row.usd_success for row in rows) / total)

    @property
    def phase_parameter(self) -> float:
        """``Σ_pairs P (2F - 1)`` over every reachable residue pair."""
        rows = self._rows(sorted(self.outcomes))
        return float(sum(row.probability * (2.0 * row.fidelity - 1.0) for row in rows))

    @property
    def average_usd(self) -> float:
        rows = self._rows(sorted(self.outcomes))
        return float(sum(row.probability * row.usd_success for row in rows))


# ── Single half link ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class HalfLinkProfile:
    """Per-residue statistics of one cat mode through one half link."""

    probabilities: Tuple[float, ...]
    fidelities: Tuple[float, ...]
    usd_damped: Tuple[float, ...]
    usd_original: float

    def usd(self, residue: int, codewords: str) -> float:
        return self.usd_damped[residue] if codewords == "damped" else self.usd_original


def half_link_fidelity_closed_form(alpha: float, eta: float, residue: int) -> float:
    """``f_j`` for ℓ = 1: ``(cosh β + cos β)/(2 cosh β)`` or ``(sinh β + sin β)/(2 sinh β)``."""
    beta = (1.0 - eta) * alpha**2
    if residue == 0:
        return float(0.5 * (1.0 + np.cos(beta) / np.cosh(beta)))
    if beta == 0.0:
        return 1.0
    return float(0.5 * (1.0 + np.sin(beta) / np.sinh(beta)))


@lru_cache(maxsize=8192)
def half_link_profile(alpha: float, loss_order: int, eta: float) -> HalfLinkProfile:
    """Residue probabilities, fidelities and USD successes of one half link.

    Closed forms for ℓ = 1; otherwise the loss amplitudes ``‖A_k|0̄>‖`` are
    taken from the Fock substrate and grouped by residue.
    """
    s = loss_order + 1
    if loss_order == 1:
        probabilities = tuple(syndrome_probability_closed_form(alpha, eta, j) for j in range(s))
        fidelities = tuple(half_link_fidelity_closed_form(alpha, eta, j) for j in range(s))
        usd_damped = tuple(damped_usd_closed_form(alpha, eta, j) for j in range(s))
        usd_original = 1.0 - abs(overlap_closed_form(alpha)) if alpha > 0.0 else 0.0
        return HalfLinkProfile(probabilities, fidelities, usd_damped, float(usd_original))

    logger.debug("building Fock half-link profile alpha=%.6g loss_order=%d eta=%.6g", alpha, loss_order, eta)
    code = CatCode(alpha, loss_order)
    cutoff = truncation_cutoff(alpha, headroom=0)
    weights = np.square(loss_amplitudes(alpha, loss_order, eta, cutoff))
    k = np.arange(len(weights))
    probabilities, fidelities, usd_damped = [], [], []
    for j in range(s):
        in_class = k % s == j
        total = float(np.sum(weights[in_class]))
        kept = float(np.sum(weights[in_class & (((k - j) // s) % 2 == 0)]))
        probabilities.append(total)
        if total > 0.0:
            fidelities.append(kept / total)
            usd_damped.append(usd_probability(code, eta, j, cutoff))
        else:
            fidelities.append(float("nan"))
            usd_damped.append(float("nan"))
    norm = sum(probabilities)
    return HalfLinkProfile(
        probabilities=tuple(p / norm for p in probabilities),
        fidelities=tuple(fidelities),
        usd_damped=tuple(usd_damped),
        usd_original=usd_probability(code, cutoff=cutoff) if alpha > 0.0 else 0.0,
    )


def _combine(f_left: float, f_right: float, target: str) -> float:
    if target == "graph":
        return f_left * f_right
    return f_left * f_right + (1.0 - f_left) * (1.0 - f_right)


def _frame_table(modulus: int, pair: ResiduePair) -> Tuple[Tuple[FrameCorrection, FrameCorrection], ...]:
    return tuple(
        (frame_correction(modulus, pair[0], z1), frame_correction(modulus, pair[1], z2))
        for z1 in (0, 1)
        for z2 in (0, 1)
    )


@lru_cache(maxsize=8192)
def link_factorized(params: LinkParams, target: Literal["bell", "graph"] = "bell") -> LinkOutcome:
    """Residue-pair table built from two independent half-link profiles."""
    profile = half_link_profile(params.alpha, params.loss_order, params.eta)
    s = params.loss_order + 1
    outcomes: Dict[ResiduePair, ResidueOutcome] = {}
    for j1 in range(s):
        for j2 in range(s):
            probability = profile.probabilities[j1] * profile.probabilities[j2]
            if probability <= 0.0:
                outcomes[(j1, j2)] = ResidueOutcome(0.0, float("nan"), float("nan"))
                continue
            outcomes[(j1, j2)] = ResidueOutcome(
                probability=probability,
                fidelity=_combine(profile.fidelities[j1], profile.fidelities[j2], target),
                usd_success=profile.usd(j1, params.usd_codewords) * profile.usd(j2, params.usd_codewords),
                frames=_frame_table(s, (j1, j2)),
            )
    return LinkOutcome(params, outcomes)


# ── Exact pipeline ────────────────────────────────────────────────────────────


def encode_pair(code: CatCode, logical: np.ndarray, cutoff: int) -> FockState:
    """Two-mode state ``Σ c[a,b] |ā>|b̄>``, normalized."""
    words = np.stack([codeword(code, 0, cutoff).amplitudes, codeword(code, 1, cutoff).amplitudes])
    return FockState(np.einsum("ab,ai,bj->ij", logical, words, words), normalized=False).normalize()


def bell_pair_state(code: CatCode, cutoff: int) -> FockState:
    """Light pair left behind by the source-station Bell measurement.

    Two half links ``(|↑>|0̄> + |↓>|1̄>)/√2`` are built, and their matter
    qubits are projected onto ``|Φ+>``.
    """
    words = np.stack([codeword(code, 0, cutoff).amplitudes, codeword(code, 1, cutoff).amplitudes])
    half = words / np.sqrt(2.0)
    joint = np.einsum("ai,bj->aibj", half, half)
    pair = np.einsum("ab,aibj->ij", BELL_TARGET.conj(), joint)
    return FockState(pair, normalized=False).normalize()


def readout_measurement(code: CatCode, eta: float, residue: int, cutoff: int) -> Optional[USDMeasurement]:
    """USD on the damped pair ``(a, R a)`` of one residue class, or ``None`` if unreachable."""
    try:
        damped = damped_codeword(code, 0, eta, residue, cutoff)
    except NumericDomainError:
        return None
    flipped = phase_rotation(code.flip_angle, cutoff).apply(damped)
    return usd_povm(damped, flipped)


def read_out_modes(
    ensemble: WeightedEnsemble,
    modes: Tuple[int, int],
    measurements: Tuple[USDMeasurement, USDMeasurement],
    code: CatCode,
    residues: ResiduePair,
    target: np.ndarray,
) -> Tuple[float, float]:
    """Read two light modes onto fresh qubits and score them against ``target``.

    Returns the USD-success-conditioned fidelity after frame correction and
    the probability that both readouts succeed.
    """
    cutoff = ensemble.dims[modes[0]] - 1
    rotation = phase_rotation(code.flip_angle, cutoff)
    target_vector = np.asarray(target, dtype=complex).reshape(-1)
    target_vector = target_vector / np.linalg.norm(target_vector)
    success, weighted = 0.0, 0.0
    for z1 in (0, 1):
        for z2 in (0, 1):
            branch, q1 = entangle_and_read(ensemble, modes[0], measurements[0].bra(z1), rotation)
            if q1 == 0.0:
                continue
            branch, q2 = entangle_and_read(branch, modes[1], measurements[1].bra(z2), rotation)
            if q2 == 0.0:
                continue
            rho = partial_trace(branch, modes)
            correction = np.kron(
                frame_correction(code.modulus, residues[0], z1).unitary(),
                frame_correction(code.modulus, residues[1], z2).unitary(),
            )
            corrected = correction @ rho @ correction.conj().T
            fidelity = float(np.real(target_vector.conj() @ corrected @ target_vector))
            success += q1 * q2
            weighted += q1 * q2 * fidelity
    if success == 0.0:
        return float("nan"), 0.0
    return min(max(weighted / success, 0.0), 1.0), success


def transmit_pair(
    pair: FockState,
    target: np.ndarray,
    code: CatCode,
    eta: float,
    k_max: int = DEFAULT_K_MAX,
) -> Dict[ResiduePair, ResidueOutcome]:
    """Send both modes of ``pair`` through loss and read them out, per residue pair."""
    s = code.modulus
    cutoff = pair.dims[0] - 1
    measurements = {j: readout_measurement(code, eta, j, cutoff) for j in range(s)}
    after_left = apply_loss_unraveled(pair, 0, eta, k_max)

    outcomes: Dict[ResiduePair, ResidueOutcome] = {}
    for j1 in range(s):
        left, p1 = project_loss_residue(after_left, 0, s, j1)
        lossy = apply_loss_unraveled(left, 1, eta, k_max) if p1 > 0.0 else None
        for j2 in range(s):
            both, p2 = project_loss_residue(lossy, 1, s, j2) if lossy is not None else (None, 0.0)
            if p1 * p2 == 0.0:
                outcomes[(j1, j2)] = ResidueOutcome(0.0, float("nan"), float("nan"))
                continue
            fidelity, success = read_out_modes(
                both, (0, 1), (measurements[j1], measurements[j2]), code, (j1, j2), target
            )
            outcomes[(j1, j2)] = ResidueOutcome(p1 * p2, fidelity, success, _frame_table(s, (j1, j2)))
    return outcomes


def link_oracle(
    params: LinkParams,
    target: Literal["bell", "graph"] = "bell",
    cutoff: Optional[int] = None,
    k_max: int = DEFAULT_K_MAX,
) -> LinkOutcome:
    """Exact Fock-space link table.

    ``target="bell"`` sends the pair prepared by the source Bell measurement
    and scores against ``|Φ+>``.  ``target="graph"`` sends the two-node graph
    state and scores against it.
    """
    code = params.code
    cutoff = code.cutoff() if cutoff is None else cutoff
    if target == "graph":
        pair, logical = encode_pair(code, GRAPH_PAIR_TARGET, cutoff), GRAPH_PAIR_TARGET
    else:
        pair, logical = bell_pair_state(code, cutoff), BELL_TARGET
    logger.debug("link oracle alpha=%.6g eta=%.6g cutoff=%d target=%s", params.alpha, params.eta, cutoff, target)
    return LinkOutcome(params, transmit_pair(pair, logical, code, params.eta, k_max))


# ── Closed forms and aggregates ───────────────────────────────────────────────


def f0_closed_form(alpha: float, eta: float, residues: ResiduePair = (0, 0), m_max: int = 60) -> float:
    """Bell fidelity for ℓ = 1 from parity sums of squared series coefficients.

    Within residue class ``j`` the loss counts ``k = j + 2q`` with even ``q``
    leave the pair intact; those with odd ``q`` flip its phase.
    """
    return f0_from_series(series_coefficients(alpha, eta, m_max), residues)


def f0_from_series(series: SeriesCoefficients, residues: ResiduePair = (0, 0)) -> float:
    halves = []
    for residue in residues:
        weights = np.square(series.C if residue == 0 else series.D)
        total = float(np.sum(weights))
        halves.append(1.0 if total == 0.0 else float(np.sum(weights[0::2])) / total)
    return _combine(halves[0], halves[1], "bell")


def p_dsm(params: LinkParams) -> float:
    """Desired-syndrome probability of one channel of one link."""
    return link_factorized(params).p_dsm


def link_usd_probability(params: LinkParams) -> float:
    """Readout success of one link given its desired syndrome."""
    return link_factorized(params).p_usd


def averaged_link_channel(params: LinkParams) -> Tuple[float, float]:
    """Single-channel link with every syndrome accepted.

    Returns ``(1.0, Σ P (2F - 1))``; the second entry lies in ``[-1, 1]``.
    """
    return 1.0, link_factorized(params).phase_parameter
