"""Generator economics: quadratic cost, per-bus loss and the projected power map."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class GeneratorParams:
    """Cost, loss and limit data of one bus.

    Attributes:
        alpha: cost offset (<= 0).
        beta: cost curvature divisor (> 0).
        gamma: constant cost term (<= 0); never affects dispatch.
        loss_factor: B in MW^-1; bus loss is ``B * P**2``.
        p_min, p_max: generation limits in MW. A load-only bus has both 0.
        demand: local load in MW.
    """

    alpha: float
    beta: float
    gamma: float = 0.0
    loss_factor: float = 0.0
    p_min: float = 0.0
    p_max: float = 0.0
    demand: float = 0.0
    name: str = ""

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.alpha > 0:
            raise ValueError(f"alpha must be <= 0, got {self.alpha}")
        if self.gamma > 0:
            raise ValueError(f"gamma must be <= 0, got {self.gamma}")
        if self.loss_factor < 0:
            raise ValueError(f"loss_factor must be >= 0, got {self.loss_factor}")
        if not 0 <= self.p_min <= self.p_max:
            raise ValueError(f"need 0 <= p_min <= p_max, got [{self.p_min}, {self.p_max}]")
        if self.demand < 0:
            raise ValueError(f"demand must be >= 0, got {self.demand}")

    @classmethod
    def load_only(cls, demand: float, name: str = "") -> "GeneratorParams":
        return cls(alpha=0.0, beta=1.0, demand=demand, name=name)


@dataclass(frozen=True)
class SystemParams:
    generators: tuple[GeneratorParams, ...]
    price_lambda0: float

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise ValueError("at least one bus is required")

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def total_demand(self) -> float:
        return sum(g.demand for g in self.generators)

    def with_generator(self, i: int, **changes) -> "SystemParams":
        gens = list(self.generators)
        gens[i] = replace(gens[i], **changes)
        return replace(self, generators=tuple(gens))

    def isolated_feasibility(self) -> tuple[bool, str]:
        """Strict island feasibility: net output at the lower limits falls short
        of demand and net output at the upper limits exceeds it."""
        low = sum(g.p_min - line_loss(g, g.p_min) for g in self.generators)
        high = sum(g.p_max - line_loss(g, g.p_max) for g in self.generators)
        demand = self.total_demand
        if low < demand < high:
            return True, f"net output range ({low:.3f}, {high:.3f}) MW brackets demand {demand:.3f} MW"
        return False, (
            f"island infeasible: net output range [{low:.3f}, {high:.3f}] MW "
            f"does not strictly bracket demand {demand:.3f} MW"
        )

    def warn_if_isolated_infeasible(self) -> bool:
        ok, msg = self.isolated_feasibility()
        if not ok:
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return ok


def cost(params: GeneratorParams, p: float) -> float:
    return (p - params.alpha) ** 2 / (2.0 * params.beta) + params.gamma


def line_loss(params: GeneratorParams, p: float) -> float:
    return params.loss_factor * p * p


def bus_mismatch(params: GeneratorParams, p: float) -> float:
    """Demand plus local loss minus generation at one bus (MW)."""
    return params.demand + params.loss_factor * p * p - p


def unclamped_power(params: GeneratorParams, lam: float) -> float | None:
    """Stationary point ``(beta*lam + alpha) / (1 + 2*B*beta*lam)``; None on a zero denominator."""
    den = 1.0 + 2.0 * params.loss_factor * params.beta * lam
    if den == 0.0:
        return None
    return (params.beta * lam + params.alpha) / den


def is_singular(params: GeneratorParams, lam: float) -> bool:
    return 1.0 + 2.0 * params.loss_factor * params.beta * lam == 0.0


def project_power(params: GeneratorParams, lam: float) -> float:
    """Generation for a given incremental cost, clamped to the unit's limits.

    With a zero denominator the sign of ``beta*lam + alpha`` picks the upper
    (positive) or lower (negative or zero) limit.
    """
    u = unclamped_power(params, lam)
    if u is None:
        return params.p_max if params.beta * lam + params.alpha > 0 else params.p_min
    if u > params.p_max:
        return params.p_max
    if u < params.p_min:
        return params.p_min
    return u


def lambda_for_power(params: GeneratorParams, p: float) -> float:
    """Incremental cost with penalty factor at which the unclamped map yields ``p``.

    Requires ``2*B*p < 1``.
    """
    return (p - params.alpha) / (params.beta * (1.0 - 2.0 * params.loss_factor * p))
