"""Tests for the elementary-link table and its two construction routes."""

import math

import numpy as np
import pytest

from catrepeater.core.cat_codes import damped_usd_closed_form, syndrome_probability_closed_form
from catrepeater.core.fock import truncation_cutoff
from catrepeater.core.link_model import (
    LinkParams,
    averaged_link_channel,
    f0_closed_form,
    frame_correction,
    half_link_fidelity_closed_form,
    link_factorized,
    link_oracle,
    link_usd_probability,
    p_dsm,
)
from catrepeater.errors import NumericDomainError


def test_half_link_transmittance_from_attenuation():
    assert LinkParams(1.0, l0=1.0).eta == pytest.approx(10 ** -0.01)
    assert LinkParams(1.0, l0=2.0, attenuation=0.5).eta == pytest.approx(10 ** -0.05)
    assert LinkParams(1.0, transmittance=0.42).eta == 0.42


def test_invalid_link_parameters():
    with pytest.raises(NumericDomainError):
        LinkParams(1.0, l0=0.0)
    with pytest.raises(NumericDomainError):
        LinkParams(1.0, desired=((2, 0),))
    with pytest.raises(NumericDomainError):
        LinkParams(1.0, desired=())


@pytest.mark.parametrize("loss_order", [1, 3])
def test_factorized_table_partitions_probability(loss_order):
    link = link_factorized(LinkParams(1.2, loss_order, transmittance=0.8))
    assert len(link.outcomes) == (loss_order + 1) ** 2
    assert link.total_probability == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.4])
@pytest.mark.parametrize("eta", [0.5, 0.9])
def test_series_fidelity_matches_factorized_table(alpha, eta):
    link = link_factorized(LinkParams(alpha, transmittance=eta))
    assert link.f0 == pytest.approx(f0_closed_form(alpha, eta), abs=1e-10)
    for pair in ((0, 1), (1, 0), (1, 1)):
        assert link.outcomes[pair].fidelity == pytest.approx(f0_closed_form(alpha, eta, pair), abs=1e-10)


def test_desired_syndrome_probability_and_readout():
    alpha, eta = 1.1, 0.85
    params = LinkParams(alpha, transmittance=eta)
    assert p_dsm(params) == pytest.approx(syndrome_probability_closed_form(alpha, eta, 0) ** 2)
    assert link_usd_probability(params) == pytest.approx(damped_usd_closed_form(alpha, eta, 0) ** 2)


def test_graph_target_multiplies_half_link_fidelities():
    alpha, eta = 1.0, 0.7
    link = link_factorized(LinkParams(alpha, transmittance=eta), "graph")
    assert link.f0 == pytest.approx(half_link_fidelity_closed_form(alpha, eta, 0) ** 2)


def test_oracle_agrees_with_series_per_residue_pair():
    alpha, eta = 1.0, 0.7
    oracle = link_oracle(LinkParams(alpha, transmittance=eta), cutoff=truncation_cutoff(alpha, headroom=0))
    assert oracle.total_probability == pytest.approx(1.0, abs=1e-10)
    for pair, row in oracle.outcomes.items():
        assert row.reachable
        assert row.fidelity == pytest.approx(f0_closed_form(alpha, eta, pair), abs=1e-8)
        assert 0.0 < row.usd_success <= 1.0


def test_single_side_accepts_any_right_residue():
    alpha, eta = 1.0, 0.8
    link = link_factorized(LinkParams(alpha, transmittance=eta, single_side=True))
    assert link.desired_pairs == ((0, 0), (0, 1))
    assert link.p_dsm == pytest.approx(syndrome_probability_closed_form(alpha, eta, 0))


def test_lossless_link_is_perfect():
    alpha = 1.2
    link = link_factorized(LinkParams(alpha, transmittance=1.0))
    assert link.p_dsm == pytest.approx(1.0)
    assert link.f0 == pytest.approx(1.0)
    assert link.p_usd == pytest.approx(damped_usd_closed_form(alpha, 1.0, 0) ** 2)
    assert not link.outcomes[(1, 1)].reachable
    assert math.isnan(link.outcomes[(1, 1)].fidelity)


def test_lossless_oracle_keeps_the_bell_pair():
    oracle = link_oracle(LinkParams(1.0, transmittance=1.0))
    row = oracle.outcomes[(0, 0)]
    assert row.probability == pytest.approx(1.0, abs=1e-12)
    assert row.fidelity == pytest.approx(1.0, abs=1e-9)
    for pair in ((0, 1), (1, 0), (1, 1)):
        assert oracle.outcomes[pair].probability == 0.0


def test_fidelity_falls_as_transmittance_drops():
    etas = np.linspace(0.1, 1.0, 19)
    fidelities = [link_factorized(LinkParams(1.0, transmittance=float(eta))).outcomes[(0, 0)].fidelity for eta in etas]
    assert np.all(np.diff(fidelities) >= -1e-12)
    assert fidelities[-1] == pytest.approx(1.0)


def test_frame_corrections():
    assert frame_correction(2, 0, 0).phase == 0.0
    assert not frame_correction(2, 1, 0).x_flip
    assert frame_correction(2, 1, 0).phase == pytest.approx(-np.pi / 2)
    assert frame_correction(2, 1, 1).x_flip
    assert frame_correction(2, 1, 1).phase == pytest.approx(np.pi / 2)
    np.testing.assert_allclose(frame_correction(4, 0, 1).unitary(), [[0, 1], [1, 0]])


@pytest.mark.parametrize("alpha", [0.4, 1.268, 2.4])
def test_averaged_channel_phase_parameter_is_bounded(alpha):
    success, phase = averaged_link_channel(LinkParams(alpha, l0=1.0))
    assert success == 1.0
    assert -1.0 <= phase <= 1.0
