from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import single_relay

from modules.oracle import grid_problem1
from modules.rates import dest_secret_rate, relay_secret_rate, secrecy_objective
from modules.scenario import EveCsi, SolveConfig
from modules.secret_solver import purify_rank, solve_problem1, t_upper_bound

CFG = SolveConfig(secrecy_bisect_tol=1e-6, rounding_samples=100)


def _within_budget(sc, alloc, P_m, tol=1e-7) -> None:
    assert alloc.Ps1 >= 0.0
    assert alloc.power <= P_m + tol
    dest = dest_secret_rate(sc, alloc.Ps1, alloc.psi)
    for i in range(sc.n_relays):
        assert relay_secret_rate(sc, i, alloc.Ps1) >= dest - tol


def test_zero_budget_gives_zero_allocation(bundled_scenario) -> None:
    alloc = solve_problem1(bundled_scenario, 0.0, CFG)
    assert alloc.secrecy_rate == 0.0
    assert alloc.Ps1 == 0.0
    assert not np.any(alloc.psi)


def test_negative_budget_rejected(bundled_scenario) -> None:
    with pytest.raises(ValueError):
        solve_problem1(bundled_scenario, -1.0, CFG)


def test_relay_weaker_than_destination_blocks_secrecy() -> None:
    sc = single_relay(alpha0=1.0, gamma=0.5, beta0=[0.1], beta=[[0.1]])
    alloc = solve_problem1(sc, 4.0, CFG)
    assert alloc.secrecy_rate == 0.0
    assert alloc.power == 0.0


def test_no_eavesdropper_matches_closed_form() -> None:
    # |alpha0|^2 = 0.25, |gamma|^2 = 4, |alpha|^2 = 1, P_m = 1: the beam takes
    # everything the relay can still decode, p = 1 / (1 + 3.75)
    sc = single_relay(alpha0=0.5, gamma=2.0, alpha=1.0)
    p = 1.0 / 4.75
    expected = 0.5 * math.log2(1.0 + 0.25 * p + (1.0 - p))
    alloc = solve_problem1(sc, 1.0, CFG)
    assert alloc.secrecy_rate == pytest.approx(expected, abs=1e-6)
    assert alloc.Ps1 == pytest.approx(p, abs=1e-5)
    _within_budget(sc, alloc, 1.0)


def test_single_eavesdropper_matches_dense_scan() -> None:
    sc = single_relay(alpha0=0.4, gamma=1.5, alpha=1.2, beta0=[0.3], beta=[[0.5]])
    alloc = solve_problem1(sc, 3.0, CFG)
    scan = grid_problem1(sc, 3.0, power_points=2000, split_points=801)
    assert alloc.secrecy_rate == pytest.approx(scan.secrecy_rate, abs=2e-3)
    assert alloc.secrecy_rate >= scan.secrecy_rate - 1e-5
    _within_budget(sc, alloc, 3.0)


def test_bundled_network_respects_constraints_and_bound(bundled_scenario) -> None:
    P_m = 10 ** 0.6 * 0.9
    alloc = solve_problem1(bundled_scenario, P_m, CFG)
    _within_budget(bundled_scenario, alloc, P_m)
    assert alloc.secrecy_rate == pytest.approx(
        secrecy_objective(bundled_scenario, alloc.Ps1, alloc.psi)
    )
    assert alloc.secrecy_rate <= alloc.relaxation_bound + CFG.secrecy_bisect_tol
    assert alloc.relaxation_bound <= 0.5 * math.log2(t_upper_bound(bundled_scenario, P_m))
    assert alloc.bisect_iters > 0


def test_more_eavesdroppers_never_help(bundled_scenario) -> None:
    P_m = 3.0
    rates = [solve_problem1(bundled_scenario.with_eves(k), P_m, CFG).secrecy_rate for k in (1, 2, 3)]
    tol = 2 * CFG.secrecy_bisect_tol
    assert rates[0] >= rates[1] - tol
    assert rates[1] >= rates[2] - tol


def test_rate_grows_with_budget_single_eavesdropper(bundled_scenario) -> None:
    sc = bundled_scenario.with_eves(1)
    rates = [solve_problem1(sc, P, CFG).secrecy_rate for P in (0.5, 1.0, 2.0, 4.0)]
    assert rates[0] > 0.0
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_statistical_csi_solution_is_feasible(bundled_scenario) -> None:
    sc = bundled_scenario.with_csi(EveCsi.STATISTICAL)
    alloc = solve_problem1(sc, 3.0, CFG)
    _within_budget(sc, alloc, 3.0)
    assert alloc.secrecy_rate >= 0.0


def test_results_are_reproducible(bundled_scenario) -> None:
    first = solve_problem1(bundled_scenario, 2.0, CFG, step_index=7)
    second = solve_problem1(bundled_scenario, 2.0, CFG, step_index=7)
    assert first.secrecy_rate == second.secrecy_rate
    np.testing.assert_array_equal(first.psi, second.psi)


def test_purify_rank_keeps_functionals() -> None:
    rng = np.random.default_rng(11)
    G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Psi = G @ G.conj().T
    functionals = []
    for _ in range(2):
        H = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        functionals.append(H + H.conj().T)
    functionals.append(np.eye(3))

    reduced = purify_rank(Psi, functionals)
    for F in functionals:
        assert np.trace(F @ reduced).real == pytest.approx(np.trace(F @ Psi).real, rel=1e-8, abs=1e-8)
    w = np.linalg.eigvalsh(reduced)
    assert w[0] >= -1e-9 * w[-1]
    assert np.count_nonzero(w > 1e-9 * w[-1]) == 1
