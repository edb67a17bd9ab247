"""Tests for the chain success probabilities, QBERs and key rates."""

import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from catrepeater.core.link_model import LinkParams, link_factorized
from catrepeater.core.rate_model import (
    ProtocolConfig,
    binary_entropy,
    cost_coefficient,
    memory_error_prob,
    p_tdsm,
    p_tz,
    qber_dephasing,
    qber_depolarizing,
    readout_exponent,
    repetition_time,
    skr,
    swapped_fidelity,
)
from catrepeater.errors import NumericDomainError, ZeroRateError


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)
    with pytest.raises(NumericDomainError):
        binary_entropy(1.5)


def test_desired_syndrome_success():
    assert p_tdsm(1.0, 4, 10) == 1.0
    assert p_tdsm(0.5, 2, 2) == pytest.approx(0.5625)
    assert p_tdsm(0.3, 1, 4) == pytest.approx(0.3**4)
    assert p_tdsm(0.0, 3, 5) == 0.0


def test_readout_success_exponents():
    assert p_tz(1.0, 1.0, 100) == 1.0
    assert p_tz(0.9, 1.0, readout_exponent("qm", 3, 5)) == pytest.approx(0.729)
    assert p_tz(0.9, 1.0, readout_exponent("graph", 2, 2)) == pytest.approx(0.6561)


def test_repetition_time():
    assert repetition_time("graph", 1e-6, 100.0, 2e8) == 1e-6
    assert repetition_time("qm", 1e-6, 0.5, 2e8) == pytest.approx(5e-6)
    assert repetition_time("qm", 1e-3, 0.5, 2e8) == 1e-3
    with pytest.raises(NumericDomainError):
        repetition_time("qm", 0.0, 1.0, 2e8)


def test_memory_error_probability():
    assert memory_error_prob(0.0, 1.0) == 0.0
    assert memory_error_prob(1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0))
    assert memory_error_prob(1.0, None) == 0.0
    assert memory_error_prob(1.0, math.inf) == 0.0


def test_swapped_fidelity():
    assert swapped_fidelity(1.0, 50) == 1.0
    assert swapped_fidelity(0.5, 7) == 0.5
    assert swapped_fidelity(0.75, 2) == pytest.approx(0.625)
    assert swapped_fidelity(0.83, 1) == pytest.approx(0.83)


def test_qber_hand_values():
    e_x, e_z = qber_depolarizing(0.9, 2, 0.1)
    assert e_x == pytest.approx(0.2408, abs=1e-12)
    assert e_z == pytest.approx(0.095, abs=1e-12)
    e_x, e_z = qber_dephasing(0.9, 2, 0.1)
    assert e_x == pytest.approx(0.2952, abs=1e-12)
    assert e_z == 0.0
    assert qber_depolarizing(0.7, 3, 1.0) == pytest.approx((0.5, 0.5))
    assert qber_dephasing(0.7, 3, 0.5)[0] == pytest.approx(0.5)


@pytest.mark.parametrize("model", [qber_depolarizing, qber_dephasing])
def test_qber_without_memory_noise_is_loss_only(model):
    for f0, n in [(0.6, 1), (0.9, 5), (0.99, 40)]:
        e_x, e_z = model(f0, n, 0.0)
        assert e_x == pytest.approx(1.0 - swapped_fidelity(f0, n), abs=1e-12)
        assert e_z == 0.0


def test_fractional_links_reject_negative_phase_base():
    with pytest.raises(NumericDomainError):
        swapped_fidelity(0.2, 2.5)


def test_perfect_graph_chain_runs_at_the_clock_rate():
    config = ProtocolConfig(l_tot=10.0, l0=1.0, m=1, variant="graph", t0=1e-6, p_m=1.0)
    link = link_factorized(LinkParams(math.sqrt(math.pi / 2.0), transmittance=1.0))
    report = skr(config, link)
    assert report.p_tot == pytest.approx(1.0, abs=1e-12)
    assert report.e_x == pytest.approx(0.0, abs=1e-12)
    assert report.r_qkd == pytest.approx(1e6, rel=1e-9)


def test_fully_depolarized_memories_give_zero_rate(caplog):
    config = ProtocolConfig(l_tot=10.0, l0=1.0, memory="depolarizing", t_c=1e-12)
    with caplog.at_level(logging.WARNING, logger="catrepeater.core.rate_model"):
        report = skr(config)
    assert any("clamped to zero" in record.getMessage() for record in caplog.records)
    assert report.e_x == pytest.approx(0.5)
    assert report.e_z == pytest.approx(0.5)
    assert report.r_raw < 0.0
    assert report.r_inf == 0.0
    assert report.r_qkd == 0.0
    assert report.log10_r_qkd == -math.inf


def test_dephasing_never_produces_z_errors():
    report = skr(ProtocolConfig(l_tot=100.0, l0=1.0, memory="dephasing", t_c=0.1))
    assert report.e_z == 0.0
    assert report.p_memory > 0.0
    depolarized = skr(ProtocolConfig(l_tot=100.0, l0=1.0, memory="depolarizing", t_c=0.1))
    assert depolarized.e_z > 0.0


def test_multiplexing_beats_the_averaged_single_channel():
    multiplexed = skr(ProtocolConfig(l_tot=1000.0, l0=1.0, m=3, alpha=1.268))
    averaged = skr(ProtocolConfig(l_tot=1000.0, l0=1.0, alpha=1.268, variant="single_channel_avg"))
    assert 1e-4 <= multiplexed.r_per_channel_use <= 1e-2
    assert 1e-15 <= averaged.r_per_channel_use <= 1e-13
    assert averaged.m == 1
    assert math.log10(multiplexed.r_per_channel_use / averaged.r_per_channel_use) >= 10.0


def test_rate_decreases_with_distance():
    rates = [skr(ProtocolConfig(l_tot=l_tot, l0=1.0, m=4)).r_qkd for l_tot in (10.0, 50.0, 200.0, 800.0)]
    assert all(a > b for a, b in zip(rates, rates[1:]))


def test_graph_and_memory_variants_agree_in_the_ideal_limit():
    common = dict(l_tot=50.0, l0=1.0, m=1, t0=2e-5, p_m=1.0, alpha=1.1)
    graph = skr(ProtocolConfig(variant="graph", **common))
    memory = skr(ProtocolConfig(variant="qm", **common))
    assert graph.r_qkd == pytest.approx(memory.r_qkd, rel=1e-12)
    assert graph.t_r == memory.t_r


def test_report_probabilities_stay_in_range():
    rng = np.random.default_rng(7)
    for _ in range(50):
        memory = str(rng.choice(["none", "dephasing", "depolarizing"]))
        config = ProtocolConfig(
            l_tot=100.0,
            l0=float(rng.choice([0.5, 1.0, 2.0, 5.0, 10.0])),
            m=int(rng.integers(1, 9)),
            alpha=float(rng.uniform(0.3, 2.5)),
            p_m=float(rng.uniform(0.9, 1.0)),
            variant=str(rng.choice(["qm", "graph", "single_channel_avg"])),
            memory=memory,
            t_c=None if memory == "none" else float(rng.uniform(0.01, 5.0)),
        )
        report = skr(config)
        for name in ("p_dsm", "p_tdsm", "p_usd", "p_tz", "p_tot", "f0", "f_tot", "e_x", "e_z", "r_inf"):
            value = getattr(report, name)
            assert 0.0 <= value <= 1.0, (name, value, config)
        assert 0.5 <= report.f_tot <= 1.0 or report.f0 < 0.5
        assert report.r_qkd >= 0.0


def test_cost_coefficient():
    config = ProtocolConfig(l_tot=1000.0, l0=1.0)
    total, per_km = cost_coefficient(config, 0.05, 5.0)
    assert per_km == pytest.approx(100.0)
    assert total == pytest.approx(1e5)
    with pytest.raises(ZeroRateError):
        cost_coefficient(config, 0.0, 5.0)


def test_report_carries_cost_when_n_s_is_set():
    report = skr(ProtocolConfig(l_tot=100.0, l0=1.0, m=4, n_s=10.0))
    assert report.cost_per_km == pytest.approx(10.0 / (report.r_qkd * 1.0))
    assert math.isnan(skr(ProtocolConfig(l_tot=100.0, l0=1.0)).cost)


def test_protocol_config_validation():
    with pytest.raises(ValidationError):
        ProtocolConfig(l_tot=10.0, l0=3.0)
    with pytest.raises(ValidationError):
        ProtocolConfig(l_tot=1.0, l0=2.0)
    with pytest.raises(ValidationError):
        ProtocolConfig(memory="dephasing")
    with pytest.raises(ValidationError):
        ProtocolConfig(residues=(2, 0))
    with pytest.raises(ValidationError):
        ProtocolConfig(unknown_field=1)
    assert ProtocolConfig(l_tot=10.0, l0=3.0, fractional_links=True).n_links == pytest.approx(10.0 / 3.0)


def test_original_codeword_readout():
    alpha = 1.0
    config = ProtocolConfig(l_tot=10.0, l0=1.0, alpha=alpha, usd_codewords="original")
    report = skr(config)
    expected = (1.0 - abs(math.cos(alpha**2)) / math.cosh(alpha**2)) ** 2
    assert report.p_usd == pytest.approx(expected, rel=1e-9)
    assert report.p_tz == pytest.approx(expected**10, rel=1e-9)
    assert report.log10_p_tz == pytest.approx(10 * math.log10(expected), rel=1e-9)
    damped = skr(ProtocolConfig(l_tot=10.0, l0=1.0, alpha=alpha))
    assert damped.p_usd != pytest.approx(report.p_usd, rel=1e-6)
