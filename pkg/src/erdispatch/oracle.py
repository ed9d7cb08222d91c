"""Centralized reference solutions of the dispatch problem.

Grid-connected: every unit sits at its projection of the distribution price
and the ER absorbs the imbalance. Isolated: bisection on the scalar residual
``sum(P_i - B_i P_i**2) - sum(P_Di)`` where ``P_i`` is the clamped projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import SystemParams, cost, line_loss, project_power, lambda_for_power, unclamped_power

ACTIVE_TOL = 1e-9
LAMBDA_TOL = 1e-12


class NoRoot(ValueError):
    """The island balance residual has no sign change: no feasible isolated dispatch."""


class AmbiguousRoot(ValueError):
    """The balance residual is not provably monotone, so the root may not be unique."""


@dataclass(frozen=True)
class DispatchSolution:
    lambda_star: float
    p_star: tuple[float, ...]
    p_mg_star: float
    active_upper: frozenset[int]
    active_lower: frozenset[int]
    total_loss: float
    total_cost: float
    isolated: bool = False


def _solution(sys: SystemParams, lam: float, p: list[float], p_mg: float, isolated: bool) -> DispatchSolution:
    gens = sys.generators
    upper = frozenset(i for i, g in enumerate(gens) if abs(p[i] - g.p_max) <= ACTIVE_TOL)
    lower = frozenset(i for i, g in enumerate(gens) if abs(p[i] - g.p_min) <= ACTIVE_TOL)
    total_cost = sum(cost(g, pi) for g, pi in zip(gens, p))
    if not isolated:
        total_cost += sys.price_lambda0 * p_mg
    return DispatchSolution(
        lambda_star=lam,
        p_star=tuple(p),
        p_mg_star=p_mg,
        active_upper=upper,
        active_lower=lower,
        total_loss=sum(line_loss(g, pi) for g, pi in zip(gens, p)),
        total_cost=total_cost,
        isolated=isolated,
    )


def solve_grid_connected(sys: SystemParams) -> DispatchSolution:
    lam = sys.price_lambda0
    p = [project_power(g, lam) for g in sys.generators]
    p_mg = sum(g.demand + line_loss(g, pi) - pi for g, pi in zip(sys.generators, p))
    return _solution(sys, lam, p, p_mg, isolated=False)


def island_residual(sys: SystemParams, lam: float) -> float:
    total = 0.0
    for g in sys.generators:
        p = project_power(g, lam)
        total += p - g.loss_factor * p * p - g.demand
    return total


def isolated_bracket(sys: SystemParams) -> tuple[float, float]:
    """Prices at which every unit sits at its lower, respectively upper, limit."""
    lo = min(lambda_for_power(g, g.p_min) for g in sys.generators)
    hi = max(lambda_for_power(g, g.p_max) for g in sys.generators)
    return lo, hi


def solve_isolated(sys: SystemParams, tol: float = LAMBDA_TOL) -> DispatchSolution:
    """Island optimum with zero exchange with the distribution system.

    Raises:
        AmbiguousRoot: some unit has ``p_max >= 1/(2B)``, where net output
            ``P - B P**2`` stops increasing.
        NoRoot: demand is not strictly bracketed by net output at the limits.
    """
    for i, g in enumerate(sys.generators):
        if g.loss_factor > 0 and g.p_max >= 1.0 / (2.0 * g.loss_factor):
            raise AmbiguousRoot(
                f"bus {i + 1}: p_max={g.p_max} >= 1/(2B)={1.0 / (2.0 * g.loss_factor):.3f}; "
                "residual monotonicity not guaranteed"
            )
    lo, hi = isolated_bracket(sys)
    r_lo, r_hi = island_residual(sys, lo), island_residual(sys, hi)
    if not (r_lo < 0.0 < r_hi):
        _, msg = sys.isolated_feasibility()
        raise NoRoot(f"no sign change of the balance residual on [{lo:.6g}, {hi:.6g}]: {msg}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if island_residual(sys, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    p = [project_power(g, lam) for g in sys.generators]
    return _solution(sys, lam, p, 0.0, isolated=True)


@dataclass(frozen=True)
class KKTCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class KKTReport:
    checks: tuple[KKTCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[KKTCheck]:
        return [c for c in self.checks if not c.passed]


def verify_kkt(sys: SystemParams, sol: DispatchSolution, isolated: bool, tol_balance: float = 1e-6) -> KKTReport:
    """Audit a dispatch against stationarity, balance, bounds and clamp-sign conditions."""
    checks: list[KKTCheck] = []
    lam = sol.lambda_star
    gens = sys.generators

    if isolated:
        checks.append(KKTCheck("no_exchange", sol.p_mg_star == 0.0, f"p_mg={sol.p_mg_star}"))
    else:
        ok = abs(lam - sys.price_lambda0) <= 1e-12 * (1 + abs(lam))
        checks.append(KKTCheck("price_match", ok, f"lambda*={lam} lambda0={sys.price_lambda0}"))

    for i, (g, p) in enumerate(zip(gens, sol.p_star)):
        ok = g.p_min - ACTIVE_TOL <= p <= g.p_max + ACTIVE_TOL
        checks.append(KKTCheck(f"bounds[{i + 1}]", ok, f"{g.p_min} <= {p} <= {g.p_max}"))

        at_upper = abs(p - g.p_max) <= ACTIVE_TOL
        at_lower = abs(p - g.p_min) <= ACTIVE_TOL
        if at_upper != (i in sol.active_upper) or at_lower != (i in sol.active_lower):
            checks.append(KKTCheck(f"active_set[{i + 1}]", False, "active sets disagree with p_star"))

        if not (at_upper or at_lower):
            den = g.beta * (1.0 - 2.0 * g.loss_factor * p)
            implied = (p - g.alpha) / den if den != 0 else math.inf
            ok = abs(lam - implied) <= 1e-6 * (1.0 + abs(lam))
            checks.append(KKTCheck(f"stationarity[{i + 1}]", ok, f"implied lambda {implied:.9g} vs {lam:.9g}"))
        elif g.p_max > g.p_min:
            u = unclamped_power(g, lam)
            if at_upper:
                ok = u is None or u >= g.p_max - 1e-7
                checks.append(KKTCheck(f"upper_sign[{i + 1}]", ok, f"unclamped {u} vs p_max {g.p_max}"))
            else:
                ok = u is None or u <= g.p_min + 1e-7
                checks.append(KKTCheck(f"lower_sign[{i + 1}]", ok, f"unclamped {u} vs p_min {g.p_min}"))

    supply = sum(sol.p_star) + sol.p_mg_star
    need = sys.total_demand + sum(line_loss(g, p) for g, p in zip(gens, sol.p_star))
    checks.append(KKTCheck("balance", abs(supply - need) <= tol_balance, f"supply {supply:.9f} vs need {need:.9f}"))
    return KKTReport(tuple(checks))
