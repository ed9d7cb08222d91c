import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from erdispatch.model import (
    GeneratorParams,
    SystemParams,
    bus_mismatch,
    cost,
    is_singular,
    lambda_for_power,
    line_loss,
    project_power,
    unclamped_power,
)
from erdispatch.oracle import solve_grid_connected

from conftest import table_generator

# Regression pin for G1 at 50 MW, from direct evaluation of (p - a)^2 / (2b) + c.
G1_COST_AT_50 = 4395.560026116611


@st.composite
def generators(draw, max_b=1e-3):
    alpha = draw(st.floats(-1e4, 0))
    beta = draw(st.floats(1.0, 200.0))
    b = draw(st.floats(0, max_b))
    lo = draw(st.floats(0, 200))
    hi = lo + draw(st.floats(0, 300))
    return GeneratorParams(alpha=alpha, beta=beta, loss_factor=b, p_min=lo, p_max=hi,
                           demand=draw(st.floats(0, 300)))


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        dict(alpha=0, beta=0),
        dict(alpha=1, beta=1),
        dict(alpha=0, beta=1, gamma=1),
        dict(alpha=0, beta=1, loss_factor=-1e-4),
        dict(alpha=0, beta=1, p_min=5, p_max=4),
        dict(alpha=0, beta=1, demand=-1),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GeneratorParams(**kwargs)

    def test_load_only(self):
        g = GeneratorParams.load_only(200.0)
        assert (g.p_min, g.p_max, g.demand) == (0.0, 0.0, 200.0)

    def test_isolated_feasibility(self, case_system):
        assert case_system.isolated_feasibility()[0]
        tiny = SystemParams((GeneratorParams(alpha=0, beta=1, p_max=10, demand=20),), 1.0)
        ok, msg = tiny.isolated_feasibility()
        assert not ok and "infeasible" in msg
        with pytest.warns(RuntimeWarning):
            tiny.warn_if_isolated_infeasible()


class TestCost:
    def test_examples(self):
        assert cost(GeneratorParams(alpha=0, beta=1), 2) == 2
        assert cost(GeneratorParams(alpha=-2, beta=2, gamma=-1), 0) == 0
        assert cost(table_generator(0), 50) == pytest.approx(G1_COST_AT_50, rel=1e-15)

    @settings(max_examples=200)
    @given(generators(), st.floats(0, 500), st.floats(0, 500))
    def test_convex(self, g, p1, p2):
        assert cost(g, (p1 + p2) / 2) <= (cost(g, p1) + cost(g, p2)) / 2 + 1e-9 * (1 + abs(cost(g, p1)))


class TestLossAndMismatch:
    def test_line_loss(self):
        assert line_loss(GeneratorParams(alpha=0, beta=1, loss_factor=0.0002), 100) == pytest.approx(2.0)
        assert line_loss(GeneratorParams(alpha=0, beta=1), 123.0) == 0

    def test_bus_mismatch(self):
        assert bus_mismatch(GeneratorParams(alpha=0, beta=1, demand=100), 40) == 60
        assert bus_mismatch(GeneratorParams(alpha=0, beta=1, loss_factor=0.01), 10) == pytest.approx(-9)

    def test_case_study_mismatch_sums_to_exchange(self, case_system):
        lam = case_system.price_lambda0
        total = sum(bus_mismatch(g, project_power(g, lam)) for g in case_system.generators)
        # the buses draw 256.853 MW from the distribution system
        assert total == pytest.approx(256.853, abs=0.005)
        loss = sum(line_loss(g, project_power(g, lam)) for g in case_system.generators)
        assert loss == pytest.approx(3.479, abs=0.005)


class TestProjection:
    def test_case_study_units(self):
        assert project_power(table_generator(1), 85) == pytest.approx(46.329, abs=1e-3)
        assert project_power(table_generator(0), 85) == 50.0

    def test_load_only_bus(self):
        g = GeneratorParams.load_only(10)
        assert project_power(g, 1e6) == 0 and project_power(g, -1e6) == 0

    def test_lossless_identity(self):
        assert project_power(GeneratorParams(alpha=0, beta=1, p_max=10), 5) == 5

    def test_singular_denominator_takes_lower_limit(self):
        g = GeneratorParams(alpha=-10, beta=2, loss_factor=0.25, p_min=1, p_max=9)
        lam = -1 / (2 * 0.25 * 2)
        assert is_singular(g, lam)
        assert unclamped_power(g, lam) is None
        assert project_power(g, lam) == 1

    def test_lambda_for_power_inverts(self):
        g = table_generator(3)
        for p in (0.0, 33.3, 150.0):
            assert unclamped_power(g, lambda_for_power(g, p)) == pytest.approx(p, abs=1e-9)

    @settings(max_examples=300)
    @given(generators(), st.floats(-1e3, 1e3))
    def test_within_limits(self, g, lam):
        p = project_power(g, lam)
        assert g.p_min <= p <= g.p_max

    @settings(max_examples=300)
    @given(generators(max_b=1e-4), st.floats(0, 500), st.floats(0, 50))
    def test_monotone_where_denominator_positive(self, g, lam, step):
        # B <= 1e-4, beta <= 200, lam <= 550 keeps 2*B*beta*lam well below 1
        assert project_power(g, lam) <= project_power(g, lam + step)

    @settings(max_examples=300)
    @given(generators(max_b=1e-4), st.floats(0, 500))
    def test_mismatch_continuous(self, g, lam):
        assume(not is_singular(g, lam))
        a = bus_mismatch(g, project_power(g, lam))
        b = bus_mismatch(g, project_power(g, lam + 1e-7))
        # derivative of the map is bounded by beta/(den^2) times (1 + 2 B P)
        assert abs(a - b) <= 1e-7 * 4 * g.beta * (1 + 2 * g.loss_factor * g.p_max) + 1e-9


def test_gamma_never_moves_dispatch(case_system):
    shifted = SystemParams(tuple(
        GeneratorParams(g.alpha, g.beta, 0.0, g.loss_factor, g.p_min, g.p_max, g.demand)
        for g in case_system.generators), case_system.price_lambda0)
    a, b = solve_grid_connected(case_system), solve_grid_connected(shifted)
    assert a.p_star == b.p_star
    assert not math.isclose(a.total_cost, b.total_cost)
