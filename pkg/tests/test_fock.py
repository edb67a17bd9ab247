"""Tests for the truncated Fock-space primitives."""

import numpy as np
import pytest
from scipy.stats import poisson

from catrepeater.core.fock import (
    FockState,
    WeightedEnsemble,
    annihilation,
    apply_loss_unraveled,
    coherent_state,
    completeness_defect,
    entangle_and_read,
    fidelity_to_pure,
    kraus_family,
    kraus_loss,
    measure_mode,
    number_operator,
    partial_trace,
    phase_rotation,
    project_loss_residue,
    tensor_product,
    truncation_cutoff,
    usd_povm,
)
from catrepeater.errors import DimensionBudgetError, DiscriminationError, NumericDomainError, TruncationError


def test_coherent_state_has_poisson_photon_statistics():
    alpha = 1.3
    state = coherent_state(alpha, truncation_cutoff(alpha))
    probs = np.abs(state.amplitudes) ** 2
    expected = poisson.pmf(np.arange(len(probs)), alpha**2)
    np.testing.assert_allclose(probs, expected, atol=1e-12)


def test_coherent_state_refuses_short_cutoff():
    with pytest.raises(TruncationError):
        coherent_state(3.0, 5)


def test_truncation_cutoff_grows_with_amplitude():
    assert truncation_cutoff(2.0, headroom=0) > truncation_cutoff(0.5, headroom=0)
    assert truncation_cutoff(1.0, headroom=5) == truncation_cutoff(1.0, headroom=0) + 5


def test_ladder_and_number_operators():
    cutoff = 5
    lowered = annihilation(cutoff).apply(FockState.vacuum(cutoff))
    np.testing.assert_allclose(lowered.amplitudes, 0.0)
    lowered = annihilation(cutoff).apply(FockState.basis(1, cutoff))
    np.testing.assert_allclose(lowered.amplitudes, FockState.vacuum(cutoff).amplitudes)
    counted = number_operator(cutoff).apply(FockState.basis(5, cutoff))
    np.testing.assert_allclose(counted.amplitudes, 5.0 * FockState.basis(5, cutoff).amplitudes)


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.9, 1.0])
def test_kraus_family_is_complete(eta):
    assert completeness_defect(kraus_family(eta, 20)) < 1e-12


def test_single_photon_loss_operator():
    out = kraus_loss(1, 0.7, 3).apply(FockState.basis(1, 3))
    np.testing.assert_allclose(out.amplitudes, [np.sqrt(0.3), 0, 0, 0], atol=1e-15)


def test_kraus_loss_rejects_bad_transmittance():
    with pytest.raises(NumericDomainError):
        kraus_loss(0, 1.5, 4)
    with pytest.raises(ValueError):
        kraus_loss(-1, 0.5, 4)


def test_unravelled_loss_of_coherent_state_is_poisson():
    alpha, eta = 1.2, 0.6
    ensemble = apply_loss_unraveled(coherent_state(alpha, truncation_cutoff(alpha)), 0, eta)
    assert ensemble.total_weight == pytest.approx(1.0, abs=1e-12)
    counts = np.bincount(ensemble.losses[:, 0].astype(int), weights=ensemble.weights)
    np.testing.assert_allclose(counts, poisson.pmf(np.arange(len(counts)), (1 - eta) * alpha**2), atol=1e-12)


def test_residue_partition_sums_to_one():
    ensemble = apply_loss_unraveled(coherent_state(1.0, truncation_cutoff(1.0)), 0, 0.5)
    total = sum(project_loss_residue(ensemble, 0, 3, r)[1] for r in range(3))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_lossless_channel_never_loses():
    ensemble = apply_loss_unraveled(coherent_state(1.0, truncation_cutoff(1.0)), 0, 1.0)
    kept, probability = project_loss_residue(ensemble, 0, 2, 1)
    assert probability == 0.0
    assert len(kept) == 0
    assert kept.losses.shape == (0, 1)
    assert len(apply_loss_unraveled(kept, 0, 0.5)) == 0


def test_non_adaptive_unravelling_raises_when_too_shallow():
    with pytest.raises(TruncationError):
        apply_loss_unraveled(coherent_state(2.0, truncation_cutoff(2.0)), 0, 0.2, k_max=1, adaptive=False)


def test_usd_on_opposite_coherent_states():
    cutoff = truncation_cutoff(1.0)
    a, b = coherent_state(1.0, cutoff), coherent_state(-1.0, cutoff)
    usd = usd_povm(a, b)
    assert usd.success_probability == pytest.approx(1 - np.exp(-2.0), abs=1e-12)
    assert abs(np.vdot(usd.bra_b, a.vector())) < 1e-12
    assert abs(np.vdot(usd.bra_a, b.vector())) < 1e-12
    assert abs(np.vdot(usd.bra_a, a.vector())) ** 2 == pytest.approx(usd.success_probability, abs=1e-12)
    failure = usd.failure.matrix
    assert np.min(np.linalg.eigvalsh((failure + failure.conj().T) / 2)) > -1e-12


def test_usd_rejects_parallel_states():
    state = coherent_state(1.0, truncation_cutoff(1.0))
    with pytest.raises(DiscriminationError):
        usd_povm(state, state)


def test_partial_trace_respects_dense_budget():
    state = FockState(np.ones((70, 70)) / 70.0)
    with pytest.raises(DimensionBudgetError):
        partial_trace(state, [0, 1])
    rho = partial_trace(state, [0])
    assert rho.shape == (70, 70)
    assert np.trace(rho).real == pytest.approx(1.0)


def test_measurement_keeps_register_positions():
    cutoff = 12
    pair = tensor_product(FockState.basis(1, cutoff), coherent_state(0.5, cutoff))
    bra = np.zeros(cutoff + 1)
    bra[1] = 1.0
    measured, probability = measure_mode(pair, 0, bra)
    assert probability == pytest.approx(1.0)
    assert measured.dims == (1, cutoff + 1)

    read, probability = entangle_and_read(pair, 0, bra, phase_rotation(np.pi, cutoff))
    assert probability == pytest.approx(1.0)
    assert read.dims == (2, cutoff + 1)


def test_fidelity_of_state_with_itself():
    state = coherent_state(0.8, 16)
    assert fidelity_to_pure(WeightedEnsemble.from_state(state), state) == pytest.approx(1.0, abs=1e-12)


def test_empty_ensemble_keeps_its_mode_count():
    empty = WeightedEnsemble(np.zeros(0), np.zeros((0, 3, 4)), np.zeros((0, 2)))
    assert len(empty) == 0
    assert empty.n_modes == 2
    assert empty.losses.shape == (0, 2)
    with pytest.raises(NumericDomainError):
        WeightedEnsemble(np.ones(1), np.ones((1, 3)), np.zeros((1, 2)))


def test_usd_elements_cover_the_span_at_overlap_one_half():
    cutoff = 3
    a = FockState.basis(0, cutoff)
    b = FockState(np.array([0.5, np.sqrt(3.0) / 2.0, 0.0, 0.0]))
    usd = usd_povm(a, b)
    assert usd.success_probability == pytest.approx(0.5, abs=1e-12)
    success_a, success_b, failure = (element.matrix for element in usd.elements())
    assert np.real(np.vdot(a.vector(), success_a @ a.vector())) == pytest.approx(0.5, abs=1e-12)
    assert np.real(np.vdot(b.vector(), success_b @ b.vector())) == pytest.approx(0.5, abs=1e-12)
    assert abs(np.vdot(b.vector(), success_a @ b.vector())) < 1e-12
    assert abs(np.vdot(a.vector(), success_b @ a.vector())) < 1e-12
    np.testing.assert_allclose(success_a + success_b + failure, np.diag([1.0, 1.0, 0.0, 0.0]), atol=1e-10)


def test_loss_on_one_mode_leaves_the_other_untouched():
    cutoff = 14
    pair = FockState(
        np.multiply.outer(coherent_state(0.9, cutoff).amplitudes, coherent_state(0.6, cutoff).amplitudes)
        + np.multiply.outer(coherent_state(-0.9, cutoff).amplitudes, coherent_state(-0.6, cutoff).amplitudes),
        normalized=False,
    ).normalize()
    before = partial_trace(pair, [1])
    after = partial_trace(apply_loss_unraveled(pair, 0, 0.6), [1])
    np.testing.assert_allclose(after, before, atol=1e-10)
