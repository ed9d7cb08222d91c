from dataclasses import replace

import numpy as np
import pytest

from erdispatch.model import GeneratorParams, SystemParams, project_power
from erdispatch.oracle import (
    AmbiguousRoot,
    NoRoot,
    island_residual,
    isolated_bracket,
    solve_grid_connected,
    solve_isolated,
    verify_kkt,
)

from reference import brute_force_isolated

GRID_P = (50.000, 46.329, 53.210, 63.165, 83.922)
ISLAND_P = (105.523, 70.000, 100.000, 133.148, 154.162)


def random_system(rng, n=None, price=None):
    n = n or int(rng.integers(1, 7))
    gens = []
    for _ in range(n):
        lo = float(rng.uniform(0, 80))
        gens.append(GeneratorParams(
            alpha=float(rng.uniform(-8000, -1000)), beta=float(rng.uniform(20, 100)),
            gamma=float(rng.uniform(-3e5, 0)), loss_factor=float(rng.uniform(0, 3e-4)),
            p_min=lo, p_max=lo + float(rng.uniform(0, 150)), demand=float(rng.uniform(0, 150)),
        ))
    return SystemParams(tuple(gens), price if price is not None else float(rng.uniform(60, 120)))


class TestGridConnected:
    def test_case_study(self, case_system):
        sol = solve_grid_connected(case_system)
        np.testing.assert_allclose(sol.p_star[:5], GRID_P, atol=0.005)
        assert sol.p_star[5] == 0.0
        assert sol.p_mg_star == pytest.approx(256.853, abs=0.005)
        assert sol.total_loss == pytest.approx(3.479, abs=0.005)
        assert sol.lambda_star == 85.0
        assert sol.active_lower == {0, 5} and sol.active_upper == {5}

    def test_single_unit(self):
        sys = SystemParams((GeneratorParams(alpha=0, beta=1, p_max=10, demand=8),), 5.0)
        sol = solve_grid_connected(sys)
        assert sol.p_star == (5.0,) and sol.p_mg_star == 3.0

    def test_load_only(self):
        sys = SystemParams((GeneratorParams.load_only(3), GeneratorParams.load_only(4)), 50.0)
        sol = solve_grid_connected(sys)
        assert sol.p_star == (0.0, 0.0) and sol.p_mg_star == 7.0

    def test_cost_includes_exchange_term(self, case_system):
        sol = solve_grid_connected(case_system)
        islanded = solve_isolated(case_system)
        base = sum((p - g.alpha) ** 2 / (2 * g.beta) + g.gamma for g, p in zip(case_system.generators, sol.p_star))
        assert sol.total_cost == pytest.approx(base + 85 * sol.p_mg_star)
        assert islanded.p_mg_star == 0.0

    def test_random_battery_passes_kkt(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            sys = random_system(rng)
            report = verify_kkt(sys, solve_grid_connected(sys), isolated=False)
            assert report.passed, report.failures()


class TestIsolated:
    def test_case_study_powers(self, case_system):
        sol = solve_isolated(case_system)
        np.testing.assert_allclose(sol.p_star[:5], ISLAND_P, atol=0.005)
        assert sol.total_loss == pytest.approx(12.833, abs=0.005)
        assert sol.p_mg_star == 0.0
        assert sol.active_upper >= {1, 2}

    def test_case_study_price_is_consistent_with_powers(self, case_system):
        # Stationarity pins the price from any unclamped unit's published output.
        sol = solve_isolated(case_system)
        gens = case_system.generators
        for i in (0, 3, 4):
            g = gens[i]
            implied = (ISLAND_P[i] - g.alpha) / (g.beta * (1 - 2 * g.loss_factor * ISLAND_P[i]))
            assert implied == pytest.approx(sol.lambda_star, abs=2e-3)
        assert sol.lambda_star == pytest.approx(88.5156, abs=1e-4)

    def test_symmetric_lossless_pair(self):
        g = GeneratorParams(alpha=0, beta=1, p_max=100, demand=20)
        sol = solve_isolated(SystemParams((g, g), 10.0))
        assert sol.p_star == pytest.approx((20, 20), abs=1e-9)
        assert sol.lambda_star == pytest.approx(20, abs=1e-9)

    def test_two_units_match_brute_force(self):
        gens = (
            GeneratorParams(alpha=-500, beta=20, loss_factor=2e-4, p_min=10, p_max=20, demand=12),
            GeneratorParams(alpha=-900, beta=35, loss_factor=1e-4, p_min=5, p_max=18, demand=15),
        )
        sol = solve_isolated(SystemParams(gens, 0.0))
        _, p_ref = brute_force_isolated(gens)
        np.testing.assert_allclose(sol.p_star, p_ref, atol=0.01)

    def test_no_root(self):
        g = GeneratorParams(alpha=0, beta=1, p_max=10, demand=30)
        with pytest.raises(NoRoot, match="infeasible"):
            solve_isolated(SystemParams((g,), 1.0))

    def test_ambiguous_root(self):
        g = GeneratorParams(alpha=0, beta=1, loss_factor=0.01, p_max=60, demand=10)
        with pytest.raises(AmbiguousRoot):
            solve_isolated(SystemParams((g,), 1.0))

    def test_bracket_ends_sit_at_limits(self, case_system):
        lo, hi = isolated_bracket(case_system)
        for g in case_system.generators:
            assert project_power(g, lo) == pytest.approx(g.p_min, abs=1e-9)
            assert project_power(g, hi) == pytest.approx(g.p_max, abs=1e-9)

    def test_random_battery(self):
        rng = np.random.default_rng(12)
        solved = 0
        for _ in range(500):
            sys = random_system(rng)
            try:
                sol = solve_isolated(sys)
            except NoRoot:
                assert not sys.isolated_feasibility()[0]
                continue
            solved += 1
            report = verify_kkt(sys, sol, isolated=True)
            assert report.passed, report.failures()
        assert solved > 100

    def test_residual_monotone(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            sys = random_system(rng)
            lo, hi = isolated_bracket(sys)
            r = [island_residual(sys, lam) for lam in np.linspace(lo - 1, hi + 1, 400)]
            assert np.all(np.diff(r) >= -1e-9)


class TestKKT:
    def test_case_study_solutions_pass(self, case_system):
        assert verify_kkt(case_system, solve_grid_connected(case_system), isolated=False).passed
        assert verify_kkt(case_system, solve_isolated(case_system), isolated=True).passed

    def test_perturbed_output_breaks_balance(self, case_system):
        sol = solve_grid_connected(case_system)
        bad = replace(sol, p_star=(sol.p_star[0] + 1.0,) + sol.p_star[1:])
        names = {c.name for c in verify_kkt(case_system, bad, isolated=False).failures()}
        assert "balance" in names

    def test_wrong_price_breaks_stationarity(self, case_system):
        sol = solve_isolated(case_system)
        bad = replace(sol, lambda_star=sol.lambda_star + 0.1)
        names = {c.name for c in verify_kkt(case_system, bad, isolated=True).failures()}
        assert {"stationarity[1]", "stationarity[4]", "stationarity[5]"} <= names

    def test_clamped_unit_on_wrong_side(self, case_system):
        # G1 at its lower limit is only optimal while its unclamped output is below the limit.
        sol = solve_grid_connected(case_system)
        bad = replace(sol, lambda_star=95.0)
        pricier = SystemParams(case_system.generators, 95.0)
        names = {c.name for c in verify_kkt(pricier, bad, isolated=False).failures()}
        assert "lower_sign[1]" in names
