from __future__ import annotations

import numpy as np
import pytest
from conftest import single_relay

from modules.oracle import grid_problem2, lp_problem2, random_scenario
from modules.public_solver import (
    PublicVariant,
    alpha_direction,
    relay_floor,
    required_snr,
    solve_problem2,
    solve_problem2_dest,
    solve_problem2_eve,
    vertex_minimum,
)
from modules.rates import dest_public_rate, eve_public_rate, relay_public_rate
from modules.scenario import EveCsi, SolveConfig

HALF = SolveConfig(public_rate=0.5)  # required SNR 1


def test_required_snr() -> None:
    assert required_snr(0.5) == pytest.approx(1.0)
    assert required_snr(0.0) == 0.0


def test_zero_public_rate_costs_nothing(bundled_scenario) -> None:
    pub = solve_problem2_dest(bundled_scenario, SolveConfig(public_rate=0.0), 1.0, [0.3, 0.1], 0.0)
    assert pub.feasible
    assert pub.total == 0.0


def test_destination_only_closed_form() -> None:
    # floor 0.25 from the relay, then the relay beam tops up 1 - 0.25 * 0.25
    sc = single_relay(alpha0=0.5, gamma=2.0, alpha=1.0)
    pub = solve_problem2_dest(sc, HALF, 0.0, [0.0], 2.0)
    assert pub.feasible
    assert pub.Ps0 == pytest.approx(0.25)
    assert pub.PR0 == pytest.approx(0.9375)
    assert pub.variant is PublicVariant.DEST_ONLY
    np.testing.assert_allclose(pub.phi_u, [1.0])


def test_destination_only_over_budget_reports_requirement() -> None:
    sc = single_relay(alpha0=0.5, gamma=2.0, alpha=1.0)
    pub = solve_problem2_dest(sc, HALF, 0.0, [0.0], 1.0)
    assert not pub.feasible
    assert pub.total == pytest.approx(1.1875)
    assert "needs 1.1875" in pub.reason


def test_source_only_when_direct_link_is_cheaper() -> None:
    sc = single_relay(alpha0=2.0, gamma=3.0, alpha=0.1)
    pub = solve_problem2_dest(sc, HALF, 0.0, [0.0], 5.0)
    assert pub.feasible
    assert pub.PR0 == 0.0
    assert pub.Ps0 == pytest.approx(0.25)


def test_relay_cut_off_from_source_is_infeasible() -> None:
    sc = single_relay(gamma=0.0)
    assert relay_floor(sc, 0.5, 0.0) is None
    pub = solve_problem2_dest(sc, HALF, 0.0, [0.0], 100.0)
    assert not pub.feasible
    assert "no channel" in pub.reason


def test_destination_only_matches_linear_program(bundled_scenario) -> None:
    cfg = SolveConfig(public_rate=0.3)
    psi = np.array([0.4 - 0.2j, 0.3 + 0.5j])
    for Ps1 in (0.0, 0.5, 2.0):
        closed = solve_problem2_dest(bundled_scenario, cfg, Ps1, psi, 100.0)
        lp = lp_problem2(bundled_scenario, cfg, Ps1, psi, 100.0)
        assert closed.feasible and lp.feasible
        assert closed.total == pytest.approx(lp.total, abs=1e-8)


def test_destination_only_allocation_meets_every_rate(bundled_scenario) -> None:
    cfg = SolveConfig(public_rate=0.2)
    psi = np.array([0.4 - 0.2j, 0.3 + 0.5j])
    pub = solve_problem2_dest(bundled_scenario, cfg, 0.5, psi, 10.0)
    for i in range(2):
        assert relay_public_rate(bundled_scenario, i, pub.Ps0, 0.5) >= 0.2 - 1e-9
    assert dest_public_rate(bundled_scenario, pub.Ps0, 0.5, pub.phi, psi) >= 0.2 - 1e-9
    np.testing.assert_allclose(pub.phi_u, alpha_direction(bundled_scenario))


def test_vertex_minimum() -> None:
    assert vertex_minimum([(1.0, 0.0, 1.0), (1.0, 2.0, 3.0)]) == pytest.approx((1.0, 1.0))
    assert vertex_minimum([(2.0, 1.0, 2.0), (1.0, 3.0, 3.0)]) == pytest.approx((0.6, 0.8))
    assert vertex_minimum([(-1.0, -1.0, 1.0)]) is None
    assert vertex_minimum([]) == (0.0, 0.0)


def test_eve_decode_reaches_every_eavesdropper(bundled_scenario) -> None:
    cfg = SolveConfig(public_rate=0.2, eve_must_decode_public=True)
    psi = np.array([0.3, 0.2j])
    pub = solve_problem2(bundled_scenario, cfg, 0.5, psi, 20.0)

    assert pub.feasible
    assert pub.variant is PublicVariant.EVE_DECODE
    assert np.linalg.norm(pub.phi_u) == pytest.approx(1.0)
    for j in range(3):
        assert eve_public_rate(bundled_scenario, j, pub.Ps0, 0.5, pub.phi, psi) >= 0.2 - 1e-7
    assert dest_public_rate(bundled_scenario, pub.Ps0, 0.5, pub.phi, psi) >= 0.2 - 1e-7

    lp = lp_problem2(bundled_scenario, cfg, 0.5, psi, 20.0, phi_u=pub.phi_u, eve_decode=True)
    assert pub.total == pytest.approx(lp.total, abs=1e-7)

    dest_only = solve_problem2_dest(bundled_scenario, cfg, 0.5, psi, 20.0)
    assert pub.total >= dest_only.total - 1e-9


def test_eve_decode_without_eavesdroppers_is_destination_only(bundled_scenario) -> None:
    sc = bundled_scenario.with_eves(0)
    cfg = SolveConfig(public_rate=0.2, eve_must_decode_public=True)
    pub = solve_problem2_eve(sc, cfg, 0.5, [0.1, 0.1], 5.0)
    dest = solve_problem2_dest(sc, cfg, 0.5, [0.1, 0.1], 5.0)
    assert pub.variant is PublicVariant.EVE_DECODE
    assert pub.total == dest.total


def test_eve_decode_with_no_budget_is_infeasible(bundled_scenario) -> None:
    cfg = SolveConfig(public_rate=0.2, eve_must_decode_public=True)
    pub = solve_problem2_eve(bundled_scenario, cfg, 0.5, [0.1, 0.1], 0.0)
    assert not pub.feasible


def test_eve_decode_tiny_budget_is_certified_infeasible(bundled_scenario) -> None:
    cfg = SolveConfig(public_rate=0.2, eve_must_decode_public=True)
    pub = solve_problem2_eve(bundled_scenario, cfg, 0.5, [0.1, 0.1], 0.05)
    assert not pub.feasible
    assert pub.reason


def test_eve_decode_needs_perfect_csi(bundled_scenario) -> None:
    sc = bundled_scenario.with_csi(EveCsi.STATISTICAL)
    cfg = SolveConfig(public_rate=0.2, eve_must_decode_public=True)
    with pytest.raises(ValueError, match="perfect CSI"):
        solve_problem2(sc, cfg, 0.5, [0.1, 0.1], 5.0)


def test_eve_decode_powers_match_dense_grid(bundled_scenario) -> None:
    cfg = SolveConfig(total_power_db=6.0, public_rate=0.2, eve_must_decode_public=True)
    psi = np.zeros(2)
    pub = solve_problem2_eve(bundled_scenario, cfg, 0.0, psi, cfg.total_power)
    assert pub.feasible

    grid = grid_problem2(
        bundled_scenario, cfg, 0.0, psi, cfg.total_power, PublicVariant.EVE_DECODE, phi_u=pub.phi_u
    )
    assert grid.feasible
    assert abs(grid.total - pub.total) <= 1e-3

    lp = lp_problem2(bundled_scenario, cfg, 0.0, psi, cfg.total_power, phi_u=pub.phi_u, eve_decode=True)
    assert lp.total == pytest.approx(pub.total, abs=1e-8)


def test_destination_only_matches_linear_program_on_random_networks() -> None:
    rng = np.random.default_rng(3)
    cfg = SolveConfig(public_rate=0.3)
    for k in range(100):
        sc = random_scenario(rng, 1 + k % 3)
        Ps1 = float(rng.uniform(0.0, 2.0))
        psi = 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        closed = solve_problem2_dest(sc, cfg, Ps1, psi, 1e3)
        lp = lp_problem2(sc, cfg, Ps1, psi, 1e3)
        assert closed.feasible and lp.feasible
        assert closed.total == pytest.approx(lp.total, abs=1e-8)
