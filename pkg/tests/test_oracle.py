from __future__ import annotations

import numpy as np
import pytest
from conftest import single_relay

from modules.oracle import (
    beam_directions,
    grid_problem1,
    grid_problem2,
    has_secrecy_room,
    lp_problem2,
    mc_ergodic_objective,
    random_scenario,
    run_oracle_check,
)
from modules.public_solver import solve_problem2_dest
from modules.rates import dest_secret_rate, secrecy_objective
from modules.scenario import ChannelScenario, EveCsi, SolveConfig
from modules.secret_solver import solve_problem1

COARSE = {"power_points": 100, "theta_points": 31, "phase_points": 90, "split_points": 26}
MEDIUM = {"power_points": 100, "theta_points": 41, "phase_points": 120, "split_points": 41}
CFG = SolveConfig(secrecy_bisect_tol=1e-6)


def test_beam_directions_are_unit_vectors(bundled_scenario) -> None:
    dirs = beam_directions(bundled_scenario, 5, 8)
    assert dirs.shape == (40, 2)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)


def test_grid_search_refuses_large_networks() -> None:
    sc = ChannelScenario(n_relays=3, n_eves=0, alpha0=0.1, gamma=[1, 1, 1], alpha=[1, 1, 1])
    with pytest.raises(ValueError, match="at most 2 relays"):
        grid_problem1(sc, 1.0)


def test_grid_search_is_a_feasible_lower_bound(bundled_scenario) -> None:
    sc = bundled_scenario.with_eves(1)
    brute = grid_problem1(sc, 3.0, **COARSE)
    solved = solve_problem1(sc, 3.0, CFG)

    assert brute.power <= 3.0 + 1e-9
    assert brute.secrecy_rate == pytest.approx(secrecy_objective(sc, brute.Ps1, brute.psi))
    assert brute.secrecy_rate <= solved.secrecy_rate + 1e-5
    assert solved.secrecy_rate - brute.secrecy_rate < 0.03


def test_grid_search_close_to_solver_with_three_eavesdroppers(bundled_scenario) -> None:
    brute = grid_problem1(bundled_scenario, 3.0, **COARSE)
    solved = solve_problem1(bundled_scenario, 3.0, CFG)
    assert abs(solved.secrecy_rate - brute.secrecy_rate) < 0.03


def test_grid_search_without_secrecy_headroom() -> None:
    sc = single_relay(alpha0=1.0, gamma=0.5, beta0=[0.1], beta=[[0.1]])
    assert grid_problem1(sc, 2.0, power_points=20).secrecy_rate == 0.0


def test_public_grid_brackets_closed_form(bundled_scenario) -> None:
    cfg = SolveConfig(public_rate=0.3)
    psi = np.array([0.2, 0.1j])
    budget = 5.0
    closed = solve_problem2_dest(bundled_scenario, cfg, 0.4, psi, budget)
    grid = grid_problem2(bundled_scenario, cfg, 0.4, psi, budget, resolution=500)
    step = budget / 500
    assert grid.feasible
    assert closed.total - 1e-9 <= grid.total <= closed.total + 2 * step


def test_public_lp_reports_budget_overrun() -> None:
    sc = single_relay(alpha0=0.5, gamma=2.0, alpha=1.0)
    lp = lp_problem2(sc, SolveConfig(public_rate=0.5), 0.0, [0.0], 1.0)
    assert not lp.feasible
    assert lp.total == pytest.approx(1.1875)


def test_monte_carlo_without_eavesdroppers_is_exact() -> None:
    sc = single_relay()
    mean, err = mc_ergodic_objective(sc, 1.0, [0.5], samples=1000)
    assert mean == pytest.approx(dest_secret_rate(sc, 1.0, [0.5]))
    assert err == 0.0


def test_monte_carlo_needs_variances(bundled_scenario) -> None:
    sc = ChannelScenario(
        n_relays=2,
        n_eves=1,
        alpha0=bundled_scenario.alpha0,
        gamma=bundled_scenario.gamma,
        alpha=bundled_scenario.alpha,
        beta0=bundled_scenario.beta0[:1],
        beta=bundled_scenario.beta[:1],
    )
    with pytest.raises(ValueError, match="variances"):
        mc_ergodic_objective(sc, 1.0, [0.1, 0.1], samples=1000)


def test_ergodic_rate_is_at_least_the_variance_surrogate(bundled_scenario) -> None:
    # the eavesdropper's mean rate is below the rate of its mean SNR
    sc = bundled_scenario.with_csi(EveCsi.STATISTICAL)
    psi = np.array([0.6, 0.4j])
    mean, err = mc_ergodic_objective(sc, 0.8, psi, samples=20000, seed=5)
    assert err > 0.0
    assert mean >= secrecy_objective(sc, 0.8, psi) - 3 * err
    again, _ = mc_ergodic_objective(sc, 0.8, psi, samples=20000, seed=5)
    assert again == mean


def test_random_scenarios_support_both_csi_modes() -> None:
    rng = np.random.default_rng(4)
    sc = random_scenario(rng, 2)
    assert sc.n_relays == 2 and sc.n_eves == 2
    stat = sc.with_csi(EveCsi.STATISTICAL)
    assert stat.eve_gram(1).shape == (2, 2)


def test_oracle_check_trials(bundled) -> None:
    sc, cfg = bundled
    cfg = cfg.with_total_power_db(3.0)
    trials = run_oracle_check(sc, cfg, trials=2, seed=1, grid=COARSE)

    assert [t.index for t in trials] == [0, 1]
    assert trials[0].n_eves == 3
    assert trials[1].eve_csi == "statistical"
    for t in trials:
        assert t.public_dev < 1e-8
        assert t.secret_oracle <= t.secret_solver + 0.03

    strict = run_oracle_check(sc, cfg, trials=1, seed=1, secret_tol=0.0, public_tol=0.0, grid=COARSE)
    assert not strict[0].passed


def test_random_scenarios_leave_room_for_secrecy() -> None:
    rng = np.random.default_rng(9)
    for k in range(30):
        csi = (EveCsi.PERFECT, EveCsi.STATISTICAL)[k % 2]
        sc = random_scenario(rng, 1 + k % 3, csi)
        assert has_secrecy_room(sc)
        assert float(sc.relay_gains2.min()) > sc.direct_gain2

    assert not has_secrecy_room(single_relay(alpha0=1.0, gamma=0.5))


@pytest.mark.slow
def test_solver_matches_grid_search_on_random_networks() -> None:
    rng = np.random.default_rng(11)
    P_m = CFG.total_power
    for k in range(20):
        csi = (EveCsi.PERFECT, EveCsi.STATISTICAL)[k % 2]
        sc = random_scenario(rng, 1 + k % 3, csi)
        solved = solve_problem1(sc, P_m, CFG)
        brute = grid_problem1(sc, P_m, **MEDIUM)
        assert solved.secrecy_rate > 0.0, f"network {k}"
        assert abs(solved.secrecy_rate - brute.secrecy_rate) <= 0.02, f"network {k}"


@pytest.mark.slow
@pytest.mark.parametrize("n_eves", [1, 2, 3])
def test_ergodic_rate_at_solved_allocation_beats_surrogate(bundled, n_eves) -> None:
    sc, cfg = bundled
    sc = sc.with_eves(n_eves).with_csi(EveCsi.STATISTICAL)
    solved = solve_problem1(sc, cfg.total_power, CFG)
    assert solved.secrecy_rate > 0.0

    mean, err = mc_ergodic_objective(sc, solved.Ps1, solved.psi, samples=100_000, seed=n_eves)
    assert mean >= solved.secrecy_rate - 3 * err
