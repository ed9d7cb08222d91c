"""Synchronous-round state machines for the two dispatch protocols.

``gc_round`` runs the grid-connected protocol (price leader-following,
projection, mismatch consensus with absorption at ER senders, ER exchange
increment). ``int_round`` runs the integrated protocol, which adds the
vanishing mismatch feedback to the price update and lets the ER keep per-bus
exchange ledgers so the microgrid can leave and rejoin the grid.

Each round is double buffered: every read refers to round ``k`` and every
write produces round ``k+1``. Within a round there are three phases:

1. each ICU updates price, power and ``y`` from its own state, its
   in-neighbours' round-``k`` messages and (if ``a_i0 = 1``) the ER price;
2. the ER collects ``y`` from ICUs with ``a_0i = 1`` and updates exchange;
3. each ICU finalises its mismatch estimate (INT ICUs with ``a_i0 = 1``
   use the ER's reply).

Passing a ``read_log`` list records every ``(reader, source, field)`` access,
with the ER written as ``"ER"``; see :func:`audit_reads`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .model import GeneratorParams, SystemParams, bus_mismatch, project_power
from .topology import GridGraph

ER = "ER"


@dataclass(frozen=True)
class AgentState:
    lambda_i: float
    p_i: float
    mismatch_est: float
    y_i: float = 0.0
    p_mi: float = 0.0
    delta_p_prev: float = 0.0


@dataclass(frozen=True)
class ErState:
    p_mg: float
    price: float
    mode: int = 1


class PowerLawGain:
    """Feedback gain ``c / (1 + k)**a`` with ``c > 0`` and ``0 < a <= 1``.

    Positive, vanishing and non-summable for every admissible ``(c, a)``.
    """

    def __init__(self, c: float = 1.0, a: float = 1.0):
        if not c > 0:
            raise ValueError(f"gain scale must be > 0, got {c}")
        if not 0 < a <= 1:
            raise ValueError(f"gain exponent must lie in (0, 1], got {a}")
        self.c = float(c)
        self.a = float(a)

    def __call__(self, k: int) -> float:
        return self.c / (1.0 + k) ** self.a

    def __eq__(self, other):
        return isinstance(other, PowerLawGain) and (self.c, self.a) == (other.c, other.a)

    def __repr__(self):
        return f"PowerLawGain(c={self.c}, a={self.a})"


def reciprocal_gain() -> PowerLawGain:
    return PowerLawGain(1.0, 1.0)


@dataclass(frozen=True)
class ProtocolConfig:
    eps: tuple[float, ...]
    mu: float
    sigma: Callable[[int], float] = field(default_factory=reciprocal_gain)

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        if any(not e > 0 for e in self.eps) or not self.mu > 0:
            raise ValueError("step sizes must be positive")

    @classmethod
    def uniform(cls, n: int, eps: float, mu: float, sigma=None) -> "ProtocolConfig":
        if sigma is None:
            return cls((eps,) * n, mu)
        return cls((eps,) * n, mu, sigma)


class _NoLog:
    __slots__ = ()

    def __call__(self, reader, source, what):
        pass


def _logger(read_log):
    if read_log is None:
        return _NoLog()
    return lambda reader, source, what: read_log.append((reader, source, what))


def initial_state(
    system: SystemParams,
    lambdas: Sequence[float] | float = 0.0,
    mode: int = 1,
) -> tuple[tuple[AgentState, ...], ErState]:
    """Round-0 state: estimates equal local mismatches and no exchange."""
    n = system.n
    if isinstance(lambdas, (int, float)):
        lambdas = [float(lambdas)] * n
    if len(lambdas) != n:
        raise ValueError(f"expected {n} initial prices, got {len(lambdas)}")
    agents = []
    for g, lam in zip(system.generators, lambdas):
        p = project_power(g, lam)
        dp = bus_mismatch(g, p)
        agents.append(AgentState(lambda_i=float(lam), p_i=p, mismatch_est=dp, delta_p_prev=dp))
    return tuple(agents), ErState(p_mg=0.0, price=system.price_lambda0, mode=mode)


def _icu_phase(i, agents, er, graph, gen: GeneratorParams, eps_i, mu, sigma_k, log):
    """Price, power and intermediate consensus value for ICU ``i``."""
    me = agents[i]
    log(i, i, "state")
    price_pull = 0.0
    est_pull = 0.0
    for j, a_ij in graph.in_neighbors[i]:
        log(i, j, "lambda,mismatch_est")
        nb = agents[j]
        price_pull += a_ij * (nb.lambda_i - me.lambda_i)
        est_pull += a_ij * (nb.mismatch_est - me.mismatch_est)
    if graph.er_to_icu[i] and er.mode:
        log(i, ER, "price")
        price_pull += er.price - me.lambda_i
    lam = me.lambda_i + eps_i * price_pull
    if sigma_k:
        lam += sigma_k * me.mismatch_est
    p = project_power(gen, lam)
    dp = bus_mismatch(gen, p)
    y = me.mismatch_est + mu * est_pull + dp - me.delta_p_prev
    return lam, p, dp, y


def _check_sizes(agents, graph, system, cfg):
    n = len(agents)
    if graph.n_icus != n or system.n != n or len(cfg.eps) != n:
        raise ValueError("agents, graph, system and eps must all have the same size")


def gc_round(
    agents: Sequence[AgentState],
    er: ErState,
    graph: GridGraph,
    system: SystemParams,
    cfg: ProtocolConfig,
    read_log: list | None = None,
) -> tuple[tuple[AgentState, ...], ErState]:
    """One round of the grid-connected protocol."""
    if er.mode != 1:
        raise ValueError("the grid-connected protocol requires mode g=1")
    _check_sizes(agents, graph, system, cfg)
    log = _logger(read_log)
    n = len(agents)
    staged = [
        _icu_phase(i, agents, er, graph, system.generators[i], cfg.eps[i], cfg.mu, 0.0, log)
        for i in range(n)
    ]

    increment = 0.0
    for i in range(n):
        if graph.icu_to_er[i]:
            log(ER, i, "y")
            increment += staged[i][3]
    new_er = replace(er, p_mg=er.p_mg + increment)

    new_agents = []
    for i, (lam, p, dp, y) in enumerate(staged):
        est = 0.0 if graph.icu_to_er[i] else y
        new_agents.append(AgentState(lam, p, est, y, 0.0, dp))
    return tuple(new_agents), new_er


def int_round(
    agents: Sequence[AgentState],
    er: ErState,
    graph: GridGraph,
    system: SystemParams,
    cfg: ProtocolConfig,
    k: int,
    read_log: list | None = None,
) -> tuple[tuple[AgentState, ...], ErState]:
    """Round ``k -> k+1`` of the integrated protocol; ``er.mode`` is the mode of round ``k+1``."""
    _check_sizes(agents, graph, system, cfg)
    log = _logger(read_log)
    n = len(agents)
    g = 1 if er.mode else 0
    sigma_k = cfg.sigma(k)
    staged = [
        _icu_phase(i, agents, er, graph, system.generators[i], cfg.eps[i], cfg.mu, sigma_k, log)
        for i in range(n)
    ]

    # ER bookkeeping: per-bus exchange ledgers and the aggregate.
    ledgers = []
    for i in range(n):
        delta_m = 0.0
        if graph.icu_to_er[i]:
            log(ER, i, "y")
            delta_m = g * staged[i][3]
        ledgers.append(g * (agents[i].p_mi + float(graph.er_to_icu[i]) * delta_m))
    new_er = replace(er, p_mg=math.fsum(ledgers))

    new_agents = []
    for i, (lam, p, dp, y) in enumerate(staged):
        est = y
        if graph.er_to_icu[i]:
            log(i, ER, "ledger_change")
            est += agents[i].p_mi - ledgers[i]
        new_agents.append(AgentState(lam, p, est, y, ledgers[i], dp))
    return tuple(new_agents), new_er


def audit_reads(read_log, graph: GridGraph) -> list[tuple]:
    """Return every logged access that violates neighbour-locality.

    An ICU may read itself, its in-neighbours and (only if ``a_i0 = 1``) the
    ER. The ER may read only ICUs with ``a_0i = 1``.
    """
    bad = []
    parents = [{j for j, _ in nbrs} for nbrs in graph.in_neighbors]
    for reader, source, what in read_log:
        if reader == ER:
            ok = source != ER and bool(graph.icu_to_er[source])
        elif source == ER:
            ok = bool(graph.er_to_icu[reader])
        else:
            ok = source == reader or source in parents[reader]
        if not ok:
            bad.append((reader, source, what))
    return bad


@dataclass(frozen=True)
class ConvergenceStatus:
    converged: bool
    max_dlambda: float
    max_abs_est: float
    max_dpmg: float
    event_in_window: bool = False


@dataclass(frozen=True)
class Tolerances:
    dlambda: float = 1e-6
    est: float = 1e-4
    dpmg: float = 1e-4


def detect_convergence(
    lambdas: Sequence[Sequence[float]],
    mismatch_est: Sequence[Sequence[float]],
    p_mg: Sequence[float],
    events_in_window: bool = False,
    tol: Tolerances = Tolerances(),
) -> ConvergenceStatus:
    """Judge a window of consecutive rounds (oldest first).

    Converged when per-round price changes, mismatch estimates and per-round
    exchange changes all stay below tolerance and no event fell in the window.
    """
    if len(lambdas) < 2:
        raise ValueError("window must span at least two rounds")
    dl = max(abs(b - a) for prev, cur in zip(lambdas, lambdas[1:]) for a, b in zip(prev, cur))
    est = max(abs(v) for row in mismatch_est[1:] for v in row)
    dpmg = max(abs(b - a) for a, b in zip(p_mg, p_mg[1:]))
    ok = dl < tol.dlambda and est < tol.est and dpmg < tol.dpmg and not events_in_window
    return ConvergenceStatus(ok, dl, est, dpmg, events_in_window)
