"""Scenario description, assumption checks, the simulation driver and its trace."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .engine import (
    AgentState,
    ErState,
    PowerLawGain,
    ProtocolConfig,
    gc_round,
    initial_state,
    int_round,
)
from .model import GeneratorParams, SystemParams, is_singular
from .oracle import solve_grid_connected, solve_isolated
from .topology import (
    GridGraph,
    check_bidirectional_er_neighbor,
    check_paths_to_er,
    check_spanning_tree_from_er,
    lemma1_spectral_check,
    step_size_bounds,
)

PROTOCOLS = ("GC", "INT")
EVENT_KINDS = ("set_mode", "outage", "reconnect", "set_price", "set_demand")
WINDOW = 50


class ConfigError(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Event:
    """A scheduled change applied just before round ``round`` is computed.

    ``index`` is the 0-based bus for outage/reconnect/set_demand; ``value``
    is the mode, price or demand for set_mode/set_price/set_demand.
    """

    round: int
    kind: str
    index: int | None = None
    value: float | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ConfigError(f"unknown event kind {self.kind!r}; expected one of {EVENT_KINDS}")

    def label(self) -> str:
        if self.kind in ("outage", "reconnect"):
            return f"{self.kind}:{self.index + 1}"
        if self.kind == "set_demand":
            return f"set_demand:{self.index + 1}={self.value:g}"
        return f"{self.kind}={self.value:g}"


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemParams
    graph: GridGraph
    protocol: str
    protocol_cfg: ProtocolConfig
    horizon: int
    events: tuple[Event, ...] = ()
    initial_lambda: tuple[float, ...] | None = None
    initial_mode: int = 1
    name: str = ""

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.horizon < 0:
            raise ConfigError("horizon must be >= 0")
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.round)))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    check: str
    status: str  # PASS | WARN | FAIL
    detail: str = ""


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)
    spectral_radius: float | None = None

    @property
    def ok(self) -> bool:
        return all(f.status != "FAIL" for f in self.findings)

    @property
    def failures(self) -> list[Finding]:
        return [f for f in self.findings if f.status == "FAIL"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.status == "WARN"]

    def add(self, check: str, ok: bool, detail: str = "", warn: bool = False):
        status = "PASS" if ok else ("WARN" if warn else "FAIL")
        self.findings.append(Finding(check, status, detail))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "spectral_radius": self.spectral_radius,
            "findings": [f.__dict__ for f in self.findings],
        }


def _check_step(report: ValidationReport, check: str, values, bounds):
    over = [i + 1 for i, (v, b) in enumerate(zip(values, bounds)) if v > b]
    at = [i + 1 for i, (v, b) in enumerate(zip(values, bounds)) if v == b]
    if over:
        report.add(check, False, f"step above bound at ICU(s) {over}")
    elif at:
        report.add(check, False, f"step equals its bound at ICU(s) {at}; the interval is open", warn=True)
    else:
        report.add(check, True, "all steps strictly inside their bounds")


def _gain_is_admissible(sigma) -> tuple[bool, str]:
    if isinstance(sigma, PowerLawGain):
        return True, f"{sigma!r}: positive, vanishing, non-summable"
    return False, "user-supplied gain: positivity/vanishing/divergent sum assumed by contract"


def validate(cfg: ScenarioConfig) -> ValidationReport:
    """Check topology, step-size and gain conditions for the configured protocol."""
    report = ValidationReport()
    graph, system, pc = cfg.graph, cfg.system, cfg.protocol_cfg
    n = graph.n_icus

    sizes_ok = system.n == n and len(pc.eps) == n
    report.add("sizes", sizes_ok, f"{system.n} buses, {n} ICUs, {len(pc.eps)} step sizes")
    if cfg.initial_lambda is not None:
        report.add("initial_lambda", len(cfg.initial_lambda) == n, f"{len(cfg.initial_lambda)} values")
    report.add("undirected", graph.is_symmetric, "ICU adjacency symmetric" if graph.is_symmetric else "ICU adjacency asymmetric")

    for ev in cfg.events:
        if not 1 <= ev.round <= cfg.horizon:
            report.add("events", False, f"{ev.label()} at round {ev.round} outside [1, {cfg.horizon}]")
        if ev.kind == "set_mode" and cfg.protocol == "GC":
            report.add("events", False, "set_mode requires the INT protocol; GC runs with g=1 throughout")
        if ev.index is not None and not 0 <= ev.index < n:
            report.add("events", False, f"{ev.kind} refers to bus {ev.index + 1} of {n}")
    if cfg.protocol == "GC" and cfg.initial_mode != 1:
        report.add("events", False, "GC requires initial mode 1")
    if not sizes_ok:
        return report

    eps_max, mu_max = step_size_bounds(graph)
    absorption = "C"
    if cfg.protocol == "GC":
        ok = check_spanning_tree_from_er(graph)
        report.add("A1 spanning tree rooted at ER", ok,
                   "every ICU reachable from the ER" if ok else "some ICU cannot be reached from the ER")
        ok = check_paths_to_er(graph)
        report.add("A2 path from every ICU to ER", ok,
                   "every ICU reaches an ER reporter" if ok else "some ICU has no path to the ER")
        _check_step(report, "A3 eps bound", pc.eps, eps_max)
        _check_step(report, "A4 mu bound", [pc.mu], [mu_max])
    else:
        absorption = "C'"
        ok = check_bidirectional_er_neighbor(graph)
        both = [i + 1 for i in range(n) if graph.er_to_icu[i] and graph.icu_to_er[i]]
        report.add("A5 connected + bidirectional ER neighbour", ok,
                   f"bidirectional ER neighbours {both}" if ok else
                   f"bidirectional ER neighbours {both}; needs at least one and a connected ICU graph")
        _check_step(report, "A6 eps bound", pc.eps, eps_max)
        _check_step(report, "A7 mu bound", [pc.mu], [mu_max])
        ok, detail = _gain_is_admissible(pc.sigma)
        report.add("A8 feedback gain", ok, detail, warn=True)
        may_island = cfg.initial_mode == 0 or any(e.kind == "set_mode" and e.value == 0 for e in cfg.events)
        if may_island:
            ok, detail = system.isolated_feasibility()
            report.add("island feasibility", ok, detail, warn=True)

    if 0 < pc.mu < mu_max:
        radius, stable = lemma1_spectral_check(graph, pc.mu, absorption)
        report.spectral_radius = radius
        report.add(f"mismatch contraction ({absorption})", stable, f"spectral radius {radius:.12f}")
    else:
        report.add(f"mismatch contraction ({absorption})", False, "skipped: mu not strictly inside its bound", warn=True)
    return report


# ---------------------------------------------------------------------------
# trace


@dataclass(frozen=True)
class RoundRecord:
    round: int
    agents: tuple[AgentState, ...]
    er: ErState
    demands: tuple[float, ...]
    total_supply: float
    total_demand: float
    total_loss: float
    est_total_mismatch: float
    real_total_mismatch: float
    events: tuple[str, ...] = ()
    singular: tuple[int, ...] = ()


def _record(k: int, agents, er: ErState, system: SystemParams, events=(), singular=()) -> RoundRecord:
    gens = system.generators
    supply = math.fsum(a.p_i for a in agents)
    demand = math.fsum(g.demand for g in gens)
    loss = math.fsum(g.loss_factor * a.p_i * a.p_i for g, a in zip(gens, agents))
    est = math.fsum(a.mismatch_est for a in agents)
    real = demand + loss - supply - er.p_mg
    return RoundRecord(
        k, tuple(agents), er, tuple(g.demand for g in gens), supply, demand, loss, est, real,
        tuple(events), tuple(singular),
    )


@dataclass
class SimulationTrace:
    config: ScenarioConfig
    records: list[RoundRecord]
    final_system: SystemParams

    def __len__(self):
        return len(self.records)

    @property
    def final(self) -> RoundRecord:
        return self.records[-1]

    def column(self, name: str) -> np.ndarray:
        """Per-round array of an aggregate or a per-agent field (rounds x N)."""
        if name in AgentState.__dataclass_fields__:
            return np.array([[getattr(a, name) for a in r.agents] for r in self.records])
        if name in ("p_mg", "price", "mode"):
            return np.array([getattr(r.er, name) for r in self.records])
        return np.array([getattr(r, name) for r in self.records])

    def columns(self) -> list[str]:
        return trace_columns(self.config.graph.n_icus)

    def rows(self) -> list[list]:
        out = []
        for r in self.records:
            row = [r.round]
            row += [a.lambda_i for a in r.agents]
            row += [a.p_i for a in r.agents]
            row += [a.mismatch_est for a in r.agents]
            row += [r.er.p_mg, r.er.mode, r.total_supply, r.total_demand, r.total_loss,
                    r.est_total_mismatch, r.real_total_mismatch]
            out.append(row)
        return out


def trace_columns(n: int) -> list[str]:
    cols = ["round"]
    for prefix in ("lambda", "p", "mismatch_est"):
        cols += [f"{prefix}_{i}" for i in range(1, n + 1)]
    cols += ["p_mg", "mode", "total_supply", "total_demand", "total_loss",
             "est_total_mismatch", "real_total_mismatch"]
    return cols


def audit_trace(trace: SimulationTrace, rel_tol: float = 1e-9) -> list[str]:
    """Recompute aggregates from per-agent fields and check the mismatch identity.

    Returns human-readable problems; empty means the trace is consistent.
    """
    problems = []
    gens = trace.config.system.generators
    for idx, r in enumerate(trace.records):
        if r.round != idx:
            problems.append(f"round index {r.round} at position {idx}")
        supply = sum(a.p_i for a in r.agents)
        loss = sum(g.loss_factor * a.p_i ** 2 for g, a in zip(gens, r.agents))
        demand = sum(r.demands)
        est = sum(a.mismatch_est for a in r.agents)
        real = demand + loss - supply - r.er.p_mg
        scale = 1.0 + abs(demand) + abs(supply) + abs(r.er.p_mg)
        for name, mine, theirs in (("supply", supply, r.total_supply), ("loss", loss, r.total_loss),
                                   ("demand", demand, r.total_demand), ("est", est, r.est_total_mismatch),
                                   ("real", real, r.real_total_mismatch)):
            if abs(mine - theirs) > 1e-12 * scale:
                problems.append(f"round {r.round}: {name} column {theirs} != recomputed {mine}")
        if abs(est - real) > rel_tol * (1.0 + abs(real)):
            problems.append(f"round {r.round}: estimated mismatch {est} != real {real}")
        if trace.config.protocol == "INT":
            pm = math.fsum(a.p_mi for a in r.agents)
            if abs(pm - r.er.p_mg) > 1e-12 * (1.0 + abs(pm)):
                problems.append(f"round {r.round}: p_mg {r.er.p_mg} != sum of ledgers {pm}")
    return problems


# ---------------------------------------------------------------------------
# running


def _apply(ev: Event, system: SystemParams, er: ErState, original: SystemParams):
    if ev.kind == "set_mode":
        er = replace(er, mode=int(ev.value))
    elif ev.kind == "set_price":
        er = replace(er, price=float(ev.value))
        system = replace(system, price_lambda0=float(ev.value))
    elif ev.kind == "outage":
        system = system.with_generator(ev.index, p_min=0.0, p_max=0.0)
    elif ev.kind == "reconnect":
        g0 = original.generators[ev.index]
        system = system.with_generator(ev.index, p_min=g0.p_min, p_max=g0.p_max)
    elif ev.kind == "set_demand":
        system = system.with_generator(ev.index, demand=float(ev.value))
    return system, er


def run(cfg: ScenarioConfig, check: bool = True) -> SimulationTrace:
    """Simulate ``cfg.horizon`` rounds and return the full trace.

    Raises:
        ConfigError: validation failed (only when ``check`` is true).
        SimulationError: some state became non-finite.
    """
    if check:
        report = validate(cfg)
        if not report.ok:
            raise ConfigError("; ".join(f"{f.check}: {f.detail}" for f in report.failures))
    system = cfg.system
    lambdas = cfg.initial_lambda if cfg.initial_lambda is not None else 0.0
    agents, er = initial_state(system, lambdas, mode=cfg.initial_mode)
    records = [_record(0, agents, er, system)]
    by_round: dict[int, list[Event]] = {}
    for ev in cfg.events:
        by_round.setdefault(ev.round, []).append(ev)

    for k in range(cfg.horizon):
        labels = []
        for ev in by_round.get(k + 1, ()):
            system, er = _apply(ev, system, er, cfg.system)
            labels.append(ev.label())
        if cfg.protocol == "GC":
            agents, er = gc_round(agents, er, cfg.graph, system, cfg.protocol_cfg)
        else:
            agents, er = int_round(agents, er, cfg.graph, system, cfg.protocol_cfg, k)
        rec = _record(k + 1, agents, er, system, labels,
                      [i for i, (g, a) in enumerate(zip(system.generators, agents)) if is_singular(g, a.lambda_i)])
        if not all(math.isfinite(v) for a in agents for v in (a.lambda_i, a.p_i, a.mismatch_est, a.y_i)) \
                or not math.isfinite(er.p_mg):
            raise SimulationError(f"non-finite state at round {k + 1}")
        records.append(rec)
    return SimulationTrace(cfg, records, system)


# ---------------------------------------------------------------------------
# summaries and convergence metrics


def settling_round(errors: Sequence[float], tol: float) -> int | None:
    """First round from which ``errors`` stays at or below ``tol``; None if it never settles."""
    errors = np.asarray(errors, dtype=float)
    bad = np.flatnonzero(~(errors <= tol))
    if bad.size == 0:
        return 0
    if bad[-1] == errors.size - 1:
        return None
    return int(bad[-1] + 1)


def quiet_rounds(lambdas: np.ndarray, est: np.ndarray, p_mg: np.ndarray, mode: np.ndarray,
                 dlambda=1e-6, est_tol=1e-4, dpmg=1e-4) -> np.ndarray:
    """Boolean per round k >= 1: the step from k-1 to k meets every tolerance."""
    dl = np.abs(np.diff(lambdas, axis=0)).max(axis=1)
    e = np.abs(est[1:]).max(axis=1)
    dp = np.abs(np.diff(p_mg))
    same_mode = mode[1:] == mode[:-1]
    return (dl < dlambda) & (e < est_tol) & (dp < dpmg) & same_mode


def summarize(columns: Sequence[str], rows: Sequence[Sequence[Any]], window: int = WINDOW) -> dict:
    """Summary of a trace table; works on in-memory rows or rows read back from CSV."""
    data = np.array([[float(v) for v in row] for row in rows])
    col = {c: i for i, c in enumerate(columns)}
    n = sum(1 for c in columns if c.startswith("lambda_"))

    def block(prefix):
        return data[:, [col[f"{prefix}_{i}"] for i in range(1, n + 1)]]

    lam, p, est = block("lambda"), block("p"), block("mismatch_est")
    p_mg, mode = data[:, col["p_mg"]], data[:, col["mode"]]
    quiet = quiet_rounds(lam, est, p_mg, mode) if len(data) > 1 else np.zeros(0, bool)
    loud = np.flatnonzero(~quiet)
    start = 1 if loud.size == 0 else int(loud[-1]) + 2  # first round of the final quiet stretch
    last = int(data[-1, col["round"]])
    settled = start + window - 1
    gap = np.abs(data[:, col["est_total_mismatch"]] - data[:, col["real_total_mismatch"]])
    return {
        "rounds": last,
        "n_icus": n,
        "final": {
            "lambda": lam[-1].tolist(),
            "p": p[-1].tolist(),
            "mismatch_est": est[-1].tolist(),
            "p_mg": float(p_mg[-1]),
            "mode": int(mode[-1]),
            "total_supply": float(data[-1, col["total_supply"]]),
            "total_demand": float(data[-1, col["total_demand"]]),
            "total_loss": float(data[-1, col["total_loss"]]),
        },
        "converged": settled <= last,
        "convergence_round": settled if settled <= last else None,
        "max_mismatch_identity_gap": float(gap.max()),
    }


def summarize_trace(trace: SimulationTrace, window: int = WINDOW) -> dict:
    return summarize(trace.columns(), trace.rows(), window)


def oracle_targets(trace: SimulationTrace):
    """Oracle solution matching the final regime (mode, limits, price, demand)."""
    if trace.final.er.mode:
        return solve_grid_connected(trace.final_system)
    return solve_isolated(trace.final_system)


def oracle_comparison(trace: SimulationTrace, p_tol: float = 0.01) -> dict:
    sol = oracle_targets(trace)
    fin = trace.final
    p_err = max(abs(a.p_i - ps) for a, ps in zip(fin.agents, sol.p_star))
    lam_err = max(abs(a.lambda_i - sol.lambda_star) for a in fin.agents)
    pmg_err = abs(fin.er.p_mg - sol.p_mg_star)
    return {
        "mode": "grid" if fin.er.mode else "isolated",
        "lambda_star": sol.lambda_star,
        "p_star": list(sol.p_star),
        "p_mg_star": sol.p_mg_star,
        "max_abs_p_error": p_err,
        "max_abs_lambda_error": lam_err,
        "p_mg_error": pmg_err,
        "threshold": p_tol,
        "passed": p_err <= p_tol and pmg_err <= p_tol,
    }


def convergence_rounds(trace: SimulationTrace, lambda_tol: float = 1e-3, p_mg_tol: float = 1e-2) -> dict:
    """Rounds after which prices and exchange stay within tolerance of the oracle targets."""
    sol = oracle_targets(trace)
    lam = trace.column("lambda_i")
    p_mg = trace.column("p_mg")
    return {
        "lambda_round": settling_round(np.abs(lam - sol.lambda_star).max(axis=1), lambda_tol),
        "p_mg_round": settling_round(np.abs(p_mg - sol.p_mg_star), p_mg_tol),
    }


# ---------------------------------------------------------------------------
# config files


def _parse_edge(spec: str, n: int):
    """``"i -> j : w"`` (i sends to j) or ``"i -- j : w"`` (both ways); 1-based."""
    try:
        body, _, weight = spec.partition(":")
        w = float(weight) if weight.strip() else 1.0
        if "->" in body:
            a, b = body.split("->")
            both = False
        elif "--" in body:
            a, b = body.split("--")
            both = True
        else:
            raise ValueError
        src, dst = int(a) - 1, int(b) - 1
    except ValueError:
        raise ConfigError(f"bad edge {spec!r}; expected 'i -> j : w' or 'i -- j : w'") from None
    if not (0 <= src < n and 0 <= dst < n) or src == dst:
        raise ConfigError(f"edge {spec!r} refers to invalid ICUs")
    if w <= 0:
        raise ConfigError(f"edge {spec!r} must have a positive weight")
    return src, dst, w, both


def _indices(values, n, what):
    out = []
    for v in values or ():
        i = int(v) - 1
        if not 0 <= i < n:
            raise ConfigError(f"{what} index {v} out of range 1..{n}")
        out.append(i)
    return out


def parse_sigma(spec) -> PowerLawGain:
    """``reciprocal`` or ``{family: power, c: C, a: A}`` or ``"power:C:A"``."""
    if spec is None or spec == "reciprocal":
        return PowerLawGain(1.0, 1.0)
    if isinstance(spec, str) and spec.startswith("power"):
        parts = spec.split(":")
        c = float(parts[1]) if len(parts) > 1 else 1.0
        a = float(parts[2]) if len(parts) > 2 else 1.0
        return PowerLawGain(c, a)
    if isinstance(spec, dict):
        family = spec.get("family", "power")
        if family == "reciprocal":
            return PowerLawGain(1.0, 1.0)
        if family == "power":
            return PowerLawGain(float(spec.get("c", 1.0)), float(spec.get("a", 1.0)))
    raise ConfigError(f"unknown sigma schedule {spec!r}")


def _per_icu(value, n, what) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * n
    if isinstance(value, list) and len(value) == n:
        return tuple(float(v) for v in value)
    raise ConfigError(f"{what} must be a number or a list of {n} numbers")


def _parse_event(raw: dict, n: int) -> Event:
    try:
        rnd, kind = int(raw["round"]), str(raw["kind"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"event {raw!r} needs integer 'round' and 'kind'") from None
    args = raw.get("args") or {}
    idx = None
    for key in ("dg", "bus"):
        if key in args:
            idx = int(args[key]) - 1
    value = None
    for key in ("g", "price", "mw"):
        if key in args:
            value = float(args[key])
    if kind in ("outage", "reconnect", "set_demand") and idx is None:
        raise ConfigError(f"event {kind} at round {rnd} needs a 'dg' (or 'bus') argument")
    if kind in ("set_mode", "set_price", "set_demand") and value is None:
        raise ConfigError(f"event {kind} at round {rnd} needs a value ('g', 'price' or 'mw')")
    if kind == "set_mode" and value not in (0.0, 1.0):
        raise ConfigError(f"set_mode at round {rnd} needs g in {{0, 1}}")
    return Event(rnd, kind, idx, value)


def parse_system(doc: dict) -> SystemParams:
    sysdoc = doc.get("system")
    if not isinstance(sysdoc, dict) or "generators" not in sysdoc:
        raise ConfigError("missing 'system' section with 'generators'")
    gens = []
    for k, g in enumerate(sysdoc["generators"], start=1):
        try:
            gens.append(GeneratorParams(
                alpha=float(g.get("alpha", 0.0)),
                beta=float(g.get("beta", 1.0)),
                gamma=float(g.get("gamma", 0.0)),
                loss_factor=float(g.get("loss_b", 0.0)),
                p_min=float(g.get("p_min", 0.0)),
                p_max=float(g.get("p_max", 0.0)),
                demand=float(g.get("demand", 0.0)),
                name=str(g.get("name", f"bus{k}")),
            ))
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"generator {k}: {exc}") from None
    if "price" not in sysdoc:
        raise ConfigError("system.price (distribution price) is required")
    return SystemParams(tuple(gens), float(sysdoc["price"]))


def parse_config(doc: dict, name: str = "") -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    system = parse_system(doc)
    n = system.n
    gdoc = doc.get("graph") or {}
    adj = np.zeros((n, n))
    for spec in gdoc.get("edges", []):
        src, dst, w, both = _parse_edge(str(spec), n)
        adj[dst, src] = w
        if both:
            adj[src, dst] = w
    to_icu = np.zeros(n)
    to_icu[_indices(gdoc.get("er_to"), n, "er_to")] = 1.0
    to_er = np.zeros(n)
    to_er[_indices(gdoc.get("er_from"), n, "er_from")] = 1.0
    graph = GridGraph(adj, to_icu, to_er)

    pdoc = doc.get("protocol") or {}
    protocol = str(pdoc.get("name", "GC")).upper()
    if protocol not in PROTOCOLS:
        raise ConfigError(f"protocol.name must be GC or INT, got {protocol!r}")
    try:
        pcfg = ProtocolConfig(_per_icu(pdoc.get("eps", 0.1), n, "protocol.eps"),
                              float(pdoc.get("mu", 0.1)), parse_sigma(pdoc.get("sigma")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    events = tuple(_parse_event(e, n) for e in doc.get("events") or [])
    init = doc.get("init") or {}
    lam0 = init.get("lambda")
    initial = None if lam0 is None else _per_icu(lam0, n, "init.lambda")
    return ScenarioConfig(
        system=system,
        graph=graph,
        protocol=protocol,
        protocol_cfg=pcfg,
        horizon=int(doc.get("horizon", 0)),
        events=events,
        initial_lambda=initial,
        initial_mode=int(init.get("mode", 1)),
        name=name or str(doc.get("name", "")),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return parse_config(doc, name=path.stem)


def with_protocol(cfg: ScenarioConfig, eps: float | None = None, mu: float | None = None,
                  sigma=None) -> ScenarioConfig:
    """Copy of ``cfg`` with uniform eps, mu or a new gain schedule substituted."""
    pc = cfg.protocol_cfg
    new = ProtocolConfig(
        (eps,) * len(pc.eps) if eps is not None else pc.eps,
        mu if mu is not None else pc.mu,
        sigma if sigma is not None else pc.sigma,
    )
    return replace(cfg, protocol_cfg=new)
