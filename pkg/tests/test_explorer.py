"""Tests for sweeps, the (alpha, m) optimizer, thresholds and cost targets."""

import math

import numpy as np
import pandas as pd
import pytest

from catrepeater.core.rate_model import ProtocolConfig, skr
from catrepeater.errors import ConfigError, NoCrossingError
from catrepeater.tools.explorer import (
    REPORT_COLUMNS,
    SweepSpec,
    calibrate_n_s,
    find_threshold,
    log_objective,
    optimize,
    solve_cost_target,
    sweep,
    with_parameters,
)

CHAIN = ProtocolConfig(l_tot=1000.0, l0=1.0)


def test_single_point_sweep():
    frame = sweep(SweepSpec(CHAIN, (("alpha", (1.268,)),)))
    assert len(frame) == 1
    assert list(frame.columns) == ["alpha"] + [c for c in REPORT_COLUMNS if c != "alpha"] + ["objective"]
    assert frame.loc[0, "objective"] == pytest.approx(skr(CHAIN).r_per_channel_use)


def test_sweep_is_deterministic_and_reproducible():
    grid = tuple(float(a) for a in np.linspace(0.5, 2.0, 50))
    spec = SweepSpec(CHAIN, (("alpha", grid),), objective="bits_per_second")
    first, second = sweep(spec), sweep(spec)
    assert len(first) == 50
    pd.testing.assert_frame_equal(first, second)
    point = with_parameters(CHAIN, {"alpha": grid[10]})
    assert first.loc[10, "r_qkd"] == skr(point).r_qkd
    assert first.loc[10, "objective"] == first.loc[10, "r_qkd"]


def test_sweep_walks_axes_in_declaration_order():
    frame = sweep(SweepSpec(CHAIN, (("alpha", (1.0, 1.2)), ("m", (1, 2, 3)))))
    assert list(frame["alpha"]) == [1.0, 1.0, 1.0, 1.2, 1.2, 1.2]
    assert list(frame["m"]) == [1, 2, 3, 1, 2, 3]
    assert frame["m"].dtype.kind == "i"


def test_sweep_rejects_bad_axes():
    with pytest.raises(ConfigError, match="unknown sweep axis"):
        SweepSpec(CHAIN, (("beta", (1.0,)),))
    with pytest.raises(ConfigError):
        SweepSpec(CHAIN, (("alpha", (1.2, 1.0)),))
    with pytest.raises(ConfigError):
        SweepSpec(CHAIN, ())
    with pytest.raises(ConfigError):
        SweepSpec(CHAIN, (("alpha", (1.0,)),), objective="throughput")


def test_measurement_error_alias():
    assert with_parameters(CHAIN, {"measurement_error": 0.001}).p_m == pytest.approx(0.999)
    with pytest.raises(ConfigError):
        with_parameters(CHAIN, {"measurement_error": 2.0})


def test_cost_objective_needs_n_s():
    with pytest.raises(ConfigError, match="needs n_s"):
        log_objective(skr(CHAIN), "cost", CHAIN)


def test_even_success_curve_peaks_at_the_usd_optimum():
    grid = tuple(float(a) for a in np.linspace(0.3, 2.5, 221))
    even = sweep(SweepSpec(ProtocolConfig(), (("alpha", grid),)))["log10_p_tz"].to_numpy()
    odd = sweep(SweepSpec(ProtocolConfig(residues=(1, 1)), (("alpha", grid),)))["log10_p_tz"].to_numpy()
    eta = ProtocolConfig().link_params().eta
    even_peak, odd_peak = int(np.argmax(even)), int(np.argmax(odd))
    assert 0 < even_peak < len(grid) - 1
    assert 0 < odd_peak < len(grid) - 1
    assert grid[even_peak] == pytest.approx(1.268, abs=0.02)
    assert grid[odd_peak] == pytest.approx(math.sqrt(math.pi / eta), abs=0.02)


def test_optimizer_prefers_one_channel_on_a_lossless_chain():
    config = ProtocolConfig(l_tot=0.001, l0=0.001)
    result = optimize(config, alpha_bounds=(1.0, 1.6), alpha_points=11, m_max=5)
    assert result.m == 1


def test_optimizer_breaks_ties_towards_small_m_and_alpha():
    config = ProtocolConfig(l_tot=10.0, l0=1.0, memory="depolarizing", t_c=1e-12)
    result = optimize(config, alpha_bounds=(0.5, 2.0), alpha_points=7, m_max=4, objective="bits_per_second")
    assert result.score == -math.inf
    assert result.m == 1
    assert result.alpha == pytest.approx(0.5)


def test_optimizer_never_loses_to_its_grid():
    config = ProtocolConfig(l_tot=100.0, l0=1.0)
    alphas = np.linspace(1.0, 1.6, 13)
    result = optimize(config, alpha_bounds=(1.0, 1.6), alpha_points=13, m_max=4)
    grid_best = max(
        log_objective(skr(with_parameters(config, {"alpha": a, "m": m})), "per_channel_use")
        for a in alphas
        for m in range(1, 5)
    )
    assert result.score >= grid_best - 1e-12
    assert result.report.alpha == result.alpha


def test_optimizer_validates_its_search_box():
    with pytest.raises(ConfigError):
        optimize(CHAIN, alpha_bounds=(2.0, 1.0))
    with pytest.raises(ConfigError):
        optimize(CHAIN, free=("l0",))


def test_optimized_rate_grows_with_coherence_time(fast_search):
    scores = [
        optimize(
            ProtocolConfig(l_tot=1000.0, l0=0.5, memory="dephasing", t_c=t_c),
            objective="bits_per_second",
            **fast_search,
        ).score
        for t_c in (0.05, 0.5, 5.0)
    ]
    assert scores[0] <= scores[1] + 1e-9
    assert scores[1] <= scores[2] + 1e-9


def test_identical_configurations_have_no_threshold():
    with pytest.raises(NoCrossingError):
        find_threshold(CHAIN, CHAIN, "measurement_error", (1e-5, 1e-2))


@pytest.mark.slow
def test_measurement_error_threshold_falls_with_coherence_time(fast_search):
    graph = ProtocolConfig(l_tot=1000.0, l0=0.5, variant="graph")
    thresholds = []
    for t_c in (0.05, 0.5, 5.0):
        memory = ProtocolConfig(l_tot=1000.0, l0=0.5, memory="dephasing", t_c=t_c)
        result = find_threshold(memory, graph, "measurement_error", (1e-5, 1e-2), optimize_over=fast_search)
        assert 3e-4 <= result.value <= 1.2e-3
        thresholds.append(result.value)
        tight = find_threshold(
            memory, graph, "measurement_error", (1e-5, 1e-2), rtol=1e-10, optimize_over=fast_search
        )
        assert abs(tight.score_a - tight.score_b) <= 1e-6 * max(abs(tight.score_a), abs(tight.score_b))
    assert thresholds[0] > thresholds[1] > thresholds[2]


COST_SEARCH = {"alpha_bounds": (0.9, 2.2), "alpha_points": 27, "m_max": 16}


def _cost_chain(**updates) -> ProtocolConfig:
    values = dict(l_tot=1000.0, l0=1.25, memory="dephasing", t_c=0.5, fractional_links=True)
    values.update(updates)
    return ProtocolConfig(**values)


def test_cost_target_needs_n_s():
    with pytest.raises(ConfigError):
        solve_cost_target(_cost_chain(), 100.0, optimize_over=COST_SEARCH)


@pytest.mark.slow
def test_cost_target_recovers_calibration_and_moves_with_distance():
    n_s = calibrate_n_s(_cost_chain(), 1.25, 100.0, optimize_over=COST_SEARCH)
    at_1000 = solve_cost_target(_cost_chain(n_s=n_s), 100.0, optimize_over=COST_SEARCH)
    assert at_1000.l0 == pytest.approx(1.25, rel=1e-2)
    assert at_1000.cost_per_km == pytest.approx(100.0, rel=1e-2)

    at_200 = solve_cost_target(_cost_chain(l_tot=200.0, n_s=n_s), 100.0, optimize_over=COST_SEARCH)
    assert at_200.l0 > at_1000.l0

    doubled = solve_cost_target(_cost_chain(n_s=2.0 * n_s), 100.0, optimize_over=COST_SEARCH)
    assert doubled.l0 < at_1000.l0


def test_unreachable_cost_target():
    with pytest.raises(NoCrossingError):
        solve_cost_target(_cost_chain(n_s=1.0), 1e-30)
