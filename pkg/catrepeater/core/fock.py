"""
catrepeater/core/fock.py
========================

Exact linear algebra over a truncated Fock space.

Everything the closed-form rate formulas claim is checked against this
module: coherent states, the annihilation and number operators, the Kraus
operators of pure loss, unambiguous state discrimination, and mixed states
written as ensembles of pure trajectories.

Representation
--------------
A ``FockState`` is a complex tensor with one axis per register.  A light
mode truncated at cutoff ``N`` contributes an axis of length ``N + 1``; a
matter qubit contributes an axis of length 2; a mode that has been measured
by a bra keeps an axis of length 1 so that register indices never shift.

Mixed states are never stored as dense multimode density matrices.  A
``WeightedEnsemble`` holds pure trajectories stacked along a leading batch
axis, together with the loss count each trajectory picked up on every mode.
One Kraus unravelling of one mode is then a single ``tensordot`` across the
whole batch.

Truncation Rule
---------------
``truncation_cutoff(alpha)`` returns the smallest ``N`` whose Poisson tail
beyond ``N`` is below ``1e-14``, plus ``headroom`` extra levels.  Coherent
states refuse to be built at a cutoff whose tail exceeds ``1e-12``, and
Kraus unravelling extends its depth until the discarded trajectory weight is
below ``1e-12``.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import orth
from scipy.special import comb, gammainc, gammaln, xlogy

from ..errors import DimensionBudgetError, DiscriminationError, NumericDomainError, TruncationError

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-14
"""Poisson tail the truncation rule leaves outside the cutoff."""

STATE_TAIL_TOLERANCE = 1e-12
"""Largest norm defect a coherent state may have before renormalization."""

TRAJECTORY_TOLERANCE = 1e-12
"""Largest trajectory weight Kraus unravelling may discard."""

NORM_TOLERANCE = 1e-12
DEFAULT_K_MAX = 12
DENSE_BUDGET = 4096
"""Largest register dimension turned into a dense density matrix."""

DISCRIMINATION_TOLERANCE = 1e-12


def _apply_on_axis(matrix: np.ndarray, tensor: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``matrix`` (out × in) with ``tensor`` along ``axis`` in place."""
    return np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)


# ── States and operators ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state of one or more registers.

    Parameters
    ----------
    amplitudes:
        Complex tensor, one axis per register.  A 1-D array is a single mode
        with cutoff ``len(amplitudes) - 1``.
    normalized:
        When ``True`` the squared norm must lie within ``1e-12`` of 1.
    """

    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.ndim == 0 or amplitudes.size == 0:
            raise NumericDomainError("a Fock state needs at least one non-empty register")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        if self.normalized:
            defect = abs(self.norm_squared() - 1.0)
            if defect > NORM_TOLERANCE:
                raise NumericDomainError(f"state flagged normalized has norm defect {defect:.3e}")

    @classmethod
    def basis(cls, n: int, cutoff: int) -> "FockState":
        """Number state ``|n>`` at the given cutoff."""
        if not 0 <= n <= cutoff:
            raise NumericDomainError(f"|{n}> does not fit below cutoff {cutoff}")
        amplitudes = np.zeros(cutoff + 1, dtype=complex)
        amplitudes[n] = 1.0
        return cls(amplitudes)

    @classmethod
    def vacuum(cls, cutoff: int) -> "FockState":
        return cls.basis(0, cutoff)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.amplitudes.shape

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        """Largest photon number representable on any register."""
        return max(self.dims) - 1

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm_squared(self) -> float:
        return float(np.vdot(self.vector(), self.vector()).real)

    def normalize(self) -> "FockState":
        norm = np.sqrt(self.norm_squared())
        if norm == 0.0:
            raise NumericDomainError("cannot normalize the zero vector")
        return FockState(self.amplitudes / norm)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense single-mode operator on a truncated Fock space."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise NumericDomainError(f"operator must be square, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    def apply(self, state: FockState, mode: int = 0) -> FockState:
        """Act on ``mode`` of ``state``; the result is left unnormalized."""
        if state.dims[mode] != self.matrix.shape[1]:
            raise NumericDomainError(
                f"operator of dimension {self.matrix.shape[1]} cannot act on mode of dimension {state.dims[mode]}"
            )
        return FockState(_apply_on_axis(self.matrix, state.amplitudes, mode), normalized=False)


def poisson_tail(cutoff: int, mean: float) -> float:
    """Probability that a Poisson variable of the given mean exceeds ``cutoff``."""
    if mean <= 0.0:
        return 0.0
    return float(gammainc(cutoff + 1, mean))


def truncation_cutoff(alpha: complex, headroom: int = DEFAULT_K_MAX) -> int:
    """Smallest cutoff leaving a Poisson tail below ``1e-14``, plus ``headroom``."""
    mean = abs(alpha) ** 2
    cutoff = 1
    while poisson_tail(cutoff, mean) >= TAIL_TOLERANCE:
        cutoff += 1
    return cutoff + headroom


def coherent_state(alpha: complex, cutoff: int) -> FockState:
    """Coherent state ``|alpha>`` truncated at ``cutoff``.

    Amplitudes are built in log space, then renormalized.

    Raises
    ------
    TruncationError
        If more than ``1e-12`` of the photon-number distribution lies above
        the cutoff.
    """
    if cutoff < 1:
        raise NumericDomainError("cutoff must be at least 1")
    mean = abs(alpha) ** 2
    tail = poisson_tail(cutoff, mean)
    if tail > STATE_TAIL_TOLERANCE:
        raise TruncationError(
            f"cutoff {cutoff} leaves tail {tail:.3e} for |alpha|={abs(alpha):.4g}; "
            f"need at least {truncation_cutoff(alpha, headroom=0)}"
        )
    n = np.arange(cutoff + 1)
    log_magnitude = -mean / 2.0 + xlogy(n, abs(alpha)) - 0.5 * gammaln(n + 1)
    amplitudes = np.exp(log_magnitude) * np.exp(1j * n * np.angle(alpha))
    return FockState(amplitudes / np.linalg.norm(amplitudes))


def annihilation(cutoff: int) -> FockOperator:
    return FockOperator(np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1))


def number_operator(cutoff: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(cutoff + 1, dtype=float)))


def phase_rotation(theta: float, cutoff: int) -> FockOperator:
    """``exp(i theta n)``; at ``theta = pi/s`` this is the cat-code logical flip."""
    return FockOperator(np.diag(np.exp(1j * theta * np.arange(cutoff + 1))))


def kraus_loss(k: int, eta: float, cutoff: int) -> FockOperator:
    """Kraus operator for losing exactly ``k`` photons at transmittance ``eta``.

    ``A_k = sqrt((1-eta)^k / k!) eta^(n/2) a^k``, i.e.
    ``<n-k|A_k|n> = sqrt(C(n, k)) (1-eta)^(k/2) eta^((n-k)/2)``.
    """
    if not 0.0 <= eta <= 1.0:
        raise NumericDomainError(f"transmittance must lie in [0, 1], got {eta}")
    if k < 0:
        raise NumericDomainError(f"loss count must be non-negative, got {k}")
    matrix = np.zeros((cutoff + 1, cutoff + 1))
    if k <= cutoff:
        n = np.arange(k, cutoff + 1)
        values = np.sqrt(comb(n, k)) * (1.0 - eta) ** (k / 2.0) * eta ** ((n - k) / 2.0)
        matrix[n - k, n] = values
    return FockOperator(matrix)


def kraus_family(eta: float, cutoff: int, k_max: int | None = None) -> List[FockOperator]:
    """``[A_0, ..., A_k_max]``; the default ``k_max = cutoff`` is the complete family."""
    k_max = cutoff if k_max is None else k_max
    return [kraus_loss(k, eta, cutoff) for k in range(k_max + 1)]


def completeness_defect(family: Sequence[FockOperator]) -> float:
    """Max-entry deviation of ``sum_k A_k^dagger A_k`` from the identity."""
    total = sum(op.matrix.conj().T @ op.matrix for op in family)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


# ── Ensembles ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class WeightedEnsemble:
    """Mixed state as a batch of pure trajectories.

    Attributes
    ----------
    weights:
        Non-negative trajectory weights, shape ``(T,)``.
    states:
        Normalized trajectory states, shape ``(T, *dims)``.
    losses:
        Photons lost so far on every register, shape ``(T, n_modes)``.
    """

    weights: np.ndarray
    states: np.ndarray
    losses: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).reshape(-1)
        states = np.array(self.states, dtype=complex)
        losses = np.array(self.losses, dtype=int)
        n_modes = states.ndim - 1
        if states.shape[0] != len(weights) or losses.size != len(weights) * n_modes:
            raise NumericDomainError("ensemble arrays disagree on trajectory or mode count")
        # Explicit shape: an empty selection still has n_modes columns.
        losses = losses.reshape(len(weights), n_modes)
        if np.any(weights < 0.0):
            raise NumericDomainError("trajectory weights must be non-negative")
        for array in (weights, states, losses):
            array.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "losses", losses)

    @classmethod
    def from_state(cls, state: FockState) -> "WeightedEnsemble":
        pure = state if state.normalized else state.normalize()
        return cls(np.ones(1), pure.amplitudes[None, ...], np.zeros((1, pure.n_modes), dtype=int))

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.states.shape[1:]

    @property
    def n_modes(self) -> int:
        return self.states.ndim - 1

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return len(self.weights)


SourceState = Union[FockState, WeightedEnsemble]


def _as_ensemble(source: SourceState) -> WeightedEnsemble:
    if isinstance(source, WeightedEnsemble):
        return source
    if isinstance(source, FockState):
        return WeightedEnsemble.from_state(source)
    raise TypeError(f"expected FockState or WeightedEnsemble, got {type(source).__name__}")


def _batch_norms(batch: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(batch) ** 2, axis=tuple(range(1, batch.ndim)))


def _broadcast(values: np.ndarray, ndim: int) -> np.ndarray:
    return values.reshape((-1,) + (1,) * (ndim - 1))


def apply_loss_unraveled(
    source: SourceState,
    mode: int,
    eta: float,
    k_max: int = DEFAULT_K_MAX,
    adaptive: bool = True,
) -> WeightedEnsemble:
    """Unravel pure loss on ``mode`` into Kraus trajectories.

    Every input trajectory ``psi`` of weight ``w`` spawns
    ``(w ||A_k psi||^2, A_k psi / ||A_k psi||)`` for ``k = 0..k_max``.
    Zero-norm branches are dropped.

    Parameters
    ----------
    source:
        Pure state or ensemble.
    mode:
        Register index of the light mode.
    eta:
        Transmittance in ``[0, 1]``.
    k_max:
        Initial unravelling depth.
    adaptive:
        Extend the depth until the discarded weight per trajectory is below
        ``1e-12``.  When ``False`` an insufficient depth raises instead.

    Raises
    ------
    TruncationError
        The discarded weight exceeds tolerance and ``adaptive`` is off.
    """
    ensemble = _as_ensemble(source)
    dim = ensemble.dims[mode]
    axis = mode + 1
    captured = np.zeros(len(ensemble))
    weights, states, losses = [], [], []

    k = 0
    while True:
        branch = _apply_on_axis(kraus_loss(k, eta, dim - 1).matrix, ensemble.states, axis)
        probs = _batch_norms(branch)
        captured += probs
        keep = probs > 0.0
        if np.any(keep):
            weights.append(ensemble.weights[keep] * probs[keep])
            states.append(branch[keep] / _broadcast(np.sqrt(probs[keep]), branch.ndim))
            counts = ensemble.losses[keep].copy()
            counts[:, mode] += k
            losses.append(counts)

        tail = float(np.max(1.0 - captured)) if len(ensemble) else 0.0
        if k >= dim - 1 or (k >= k_max and tail <= TRAJECTORY_TOLERANCE):
            break
        if k >= k_max and not adaptive:
            raise TruncationError(f"Kraus depth {k_max} leaves trajectory weight {tail:.3e} on mode {mode}")
        if k == k_max:
            logger.debug("extending Kraus depth past %d on mode %d (tail %.3e)", k_max, mode, tail)
        k += 1

    if not weights:
        return WeightedEnsemble(np.zeros(0), np.zeros((0,) + ensemble.dims), np.zeros((0, ensemble.n_modes)))
    return WeightedEnsemble(np.concatenate(weights), np.concatenate(states), np.concatenate(losses))


def project_loss_residue(
    ensemble: WeightedEnsemble, mode: int, modulus: int, residue: int
) -> Tuple[WeightedEnsemble, float]:
    """Keep trajectories whose loss count on ``mode`` is ``residue`` mod ``modulus``.

    Returns the renormalized kept ensemble and its probability.  An empty
    selection returns an empty ensemble with probability 0.
    """
    if not 0 <= residue < modulus:
        raise NumericDomainError(f"residue {residue} outside 0..{modulus - 1}")
    total = ensemble.total_weight
    mask = ensemble.losses[:, mode] % modulus == residue
    kept = float(np.sum(ensemble.weights[mask]))
    if total == 0.0 or kept == 0.0:
        empty = WeightedEnsemble(np.zeros(0), np.zeros((0,) + ensemble.dims), np.zeros((0, ensemble.n_modes)))
        return empty, 0.0
    projected = WeightedEnsemble(ensemble.weights[mask] / kept, ensemble.states[mask], ensemble.losses[mask])
    return projected, kept / total


def _contract(ensemble: WeightedEnsemble, mode: int, matrix: np.ndarray) -> Tuple[WeightedEnsemble, float]:
    """Apply a measurement Kraus map to ``mode`` and renormalize."""
    total = ensemble.total_weight
    branch = _apply_on_axis(matrix, ensemble.states, mode + 1)
    probs = _batch_norms(branch)
    keep = probs > 0.0
    weights = ensemble.weights[keep] * probs[keep]
    probability = float(np.sum(weights)) / total if total > 0.0 else 0.0
    if probability == 0.0:
        empty = WeightedEnsemble(np.zeros(0), np.zeros((0,) + branch.shape[1:]), np.zeros((0, ensemble.n_modes)))
        return empty, 0.0
    states = branch[keep] / _broadcast(np.sqrt(probs[keep]), branch.ndim)
    return WeightedEnsemble(weights / np.sum(weights), states, ensemble.losses[keep]), probability


def measure_mode(ensemble: SourceState, mode: int, bra: np.ndarray) -> Tuple[WeightedEnsemble, float]:
    """Condition on the outcome whose Kraus bra is ``bra``.

    The measured register keeps an axis of length 1.  Returns the
    renormalized conditional ensemble and the outcome probability.
    """
    return _contract(_as_ensemble(ensemble), mode, np.conj(bra)[None, :])


def entangle_and_read(
    ensemble: SourceState, mode: int, bra: np.ndarray, rotation: FockOperator
) -> Tuple[WeightedEnsemble, float]:
    """Couple a fresh matter qubit to ``mode`` and read the light out.

    The qubit starts in ``|+>`` and drives ``rotation`` on the light when in
    its second basis state; the light is then measured with ``bra``.  The
    light axis is replaced by the qubit axis (length 2).
    """
    readout = np.vstack([np.conj(bra), np.conj(bra) * np.diag(rotation.matrix)]) / np.sqrt(2.0)
    return _contract(_as_ensemble(ensemble), mode, readout)


# ── Discrimination ────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class USDMeasurement:
    """Optimal equal-prior unambiguous discrimination of two pure states.

    ``success_a`` never fires on ``b`` and vice versa; ``failure`` completes
    the projector onto their span.  ``bra_a`` and ``bra_b`` are the rank-one
    Kraus bras of the two success outcomes.
    """

    success_a: FockOperator
    success_b: FockOperator
    failure: FockOperator
    bra_a: np.ndarray
    bra_b: np.ndarray
    overlap: complex

    @property
    def success_probability(self) -> float:
        return 1.0 - abs(self.overlap)

    def bra(self, outcome: int) -> np.ndarray:
        return self.bra_a if outcome == 0 else self.bra_b

    def elements(self) -> Tuple[FockOperator, FockOperator, FockOperator]:
        return self.success_a, self.success_b, self.failure


def usd_povm(span_a: FockState, span_b: FockState) -> USDMeasurement:
    """Build the optimal unambiguous discriminator for ``span_a`` versus ``span_b``.

    Each success element is the projector onto the state orthogonal to the
    other input, scaled by ``1 / (1 + |<a|b>|)``; both inputs are then
    identified with probability ``1 - |<a|b>|``.

    Raises
    ------
    DiscriminationError
        If the two states are parallel within ``1e-12``.
    """
    a = span_a.normalize().vector()
    b = span_b.normalize().vector()
    gamma = complex(np.vdot(a, b))
    if 1.0 - abs(gamma) < DISCRIMINATION_TOLERANCE:
        raise DiscriminationError(f"states are parallel (|<a|b>| = {abs(gamma):.15f}); nothing to discriminate")

    scale = np.sqrt((1.0 - abs(gamma) ** 2) * (1.0 + abs(gamma)))
    bra_a = (a - np.conj(gamma) * b) / scale
    bra_b = (b - gamma * a) / scale
    span = orth(np.column_stack([a, b]))
    projector = span @ span.conj().T
    success_a = np.outer(bra_a, bra_a.conj())
    success_b = np.outer(bra_b, bra_b.conj())
    return USDMeasurement(
        success_a=FockOperator(success_a),
        success_b=FockOperator(success_b),
        failure=FockOperator(projector - success_a - success_b),
        bra_a=bra_a,
        bra_b=bra_b,
        overlap=gamma,
    )


# ── Plumbing ──────────────────────────────────────────────────────────────────


def tensor_product(*states: FockState) -> FockState:
    amplitudes = reduce(np.multiply.outer, (s.amplitudes for s in states))
    return FockState(amplitudes, normalized=all(s.normalized for s in states))


def inner_product(bra: FockState, ket: FockState) -> complex:
    """``<bra|ket>`` over all registers."""
    return complex(np.vdot(bra.vector(), ket.vector()))


def partial_trace(source: SourceState, keep: Sequence[int]) -> np.ndarray:
    """Dense reduced density matrix of the registers in ``keep``.

    Raises
    ------
    DimensionBudgetError
        If the kept registers span more than ``DENSE_BUDGET`` dimensions.
    """
    ensemble = _as_ensemble(source)
    keep = list(keep)
    rest = [m for m in range(ensemble.n_modes) if m not in keep]
    kept_dim = int(np.prod([ensemble.dims[m] for m in keep]))
    if kept_dim > DENSE_BUDGET:
        raise DimensionBudgetError(f"reduced register of dimension {kept_dim} exceeds {DENSE_BUDGET}")
    order = [0] + [m + 1 for m in keep] + [m + 1 for m in rest]
    flat = np.transpose(ensemble.states, order).reshape(len(ensemble), kept_dim, -1)
    rho = np.einsum("t,tir,tjr->ij", ensemble.weights, flat, flat.conj())
    total = ensemble.total_weight
    return rho / total if total > 0.0 else rho


def fidelity_to_pure(source: SourceState, target: FockState) -> float:
    """``sum_i w_i |<target|psi_i>|^2`` for a normalized ensemble."""
    ensemble = _as_ensemble(source)
    if ensemble.dims != target.dims:
        raise NumericDomainError(f"target dims {target.dims} do not match ensemble dims {ensemble.dims}")
    overlaps = ensemble.states.reshape(len(ensemble), -1) @ target.normalize().vector().conj()
    total = ensemble.total_weight
    value = float(np.sum(ensemble.weights * np.abs(overlaps) ** 2) / total) if total > 0.0 else 0.0
    return min(max(value, 0.0), 1.0)
