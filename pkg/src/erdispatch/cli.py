"""Command-line front end.

Exit codes: 0 success, 1 simulation error, 2 usage or configuration error.
Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .oracle import AmbiguousRoot, NoRoot, solve_grid_connected, solve_isolated, verify_kkt
from .scenario import (
    ConfigError,
    SimulationError,
    convergence_rounds,
    load_config,
    oracle_comparison,
    parse_sigma,
    run,
    summarize_trace,
    validate,
    with_protocol,
)

log = logging.getLogger("erdispatch")

EXIT_OK, EXIT_SIM, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind, self.message = code, kind, message


def _config(args):
    path = args.config_opt or args.config
    if not path:
        raise CliError(EXIT_USAGE, "usage", "a config path is required (positional or --config)")
    try:
        return load_config(path)
    except FileNotFoundError:
        raise CliError(EXIT_USAGE, "config", f"config not found: {path}") from None
    except ConfigError as exc:
        raise CliError(EXIT_USAGE, "config", str(exc)) from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(args, text: str):
    if not args.quiet:
        print(text)


def cmd_run(args) -> int:
    cfg = _config(args)
    report = validate(cfg)
    if not report.ok:
        raise CliError(EXIT_USAGE, "validation", json.dumps(report.to_dict()))
    try:
        trace = run(cfg, check=False)
    except SimulationError as exc:
        raise CliError(EXIT_SIM, "simulation", str(exc)) from None
    out = _out_dir(args)
    if args.format == "json":
        trace_path = io.write_trace_json(trace, out / "trace.json")
    else:
        trace_path = io.write_trace_csv(trace, out / "trace.csv")
    if args.long:
        io.write_trace_long(trace, out / "trace_long.csv")
    summary = summarize_trace(trace)
    if args.oracle_check:
        try:
            summary["oracle"] = oracle_comparison(trace)
        except (NoRoot, AmbiguousRoot) as exc:
            summary["oracle"] = {"error": type(exc).__name__, "message": str(exc)}
    io.write_json(summary, out / "summary.json")
    fin = summary["final"]
    _emit(args, f"wrote {trace_path} ({summary['rounds'] + 1} rounds) and {out / 'summary.json'}")
    _emit(args, f"final p_mg = {fin['p_mg']:.3f} MW, lambda = "
                + ", ".join(f"{v:.3f}" for v in fin["lambda"]))
    if "oracle" in summary and "passed" in summary["oracle"]:
        o = summary["oracle"]
        _emit(args, f"oracle check: max |P_i - P_i*| = {o['max_abs_p_error']:.3e} MW, "
                    f"|P_MG - P_MG*| = {o['p_mg_error']:.3e} MW -> {'PASS' if o['passed'] else 'FAIL'}")
        if not o["passed"]:
            return EXIT_SIM
    return EXIT_OK


def format_solution(sol, names=None) -> str:
    lines = [f"mode        : {'isolated' if sol.isolated else 'grid-connected'}",
             f"lambda*     : {sol.lambda_star:.3f}"]
    for i, p in enumerate(sol.p_star):
        name = names[i] if names else f"bus{i + 1}"
        flag = " (upper)" if i in sol.active_upper and i not in sol.active_lower else (
            " (lower)" if i in sol.active_lower and i not in sol.active_upper else "")
        lines.append(f"P{i + 1:<2} {name:<7}: {p:10.3f} MW{flag}")
    lines.append(f"P_MG*       : {sol.p_mg_star:10.3f} MW")
    lines.append(f"total loss  : {sol.total_loss:10.3f} MW")
    lines.append(f"total cost  : {sol.total_cost:.3f}")
    return "\n".join(lines)


def cmd_oracle(args) -> int:
    cfg = _config(args)
    system = cfg.system
    try:
        sol = solve_grid_connected(system) if args.mode == "grid" else solve_isolated(system)
    except NoRoot as exc:
        raise CliError(EXIT_USAGE, "NoRoot",
                       f"{exc}. The island needs net output at the lower limits below demand "
                       "and net output at the upper limits above it.") from None
    except AmbiguousRoot as exc:
        raise CliError(EXIT_USAGE, "AmbiguousRoot", str(exc)) from None
    kkt = verify_kkt(system, sol, isolated=args.mode == "isolated")
    if args.format == "json":
        print(json.dumps({
            "mode": args.mode, "lambda_star": sol.lambda_star, "p_star": list(sol.p_star),
            "p_mg_star": sol.p_mg_star, "total_loss": sol.total_loss, "total_cost": sol.total_cost,
            "active_upper": sorted(i + 1 for i in sol.active_upper),
            "active_lower": sorted(i + 1 for i in sol.active_lower),
            "kkt_passed": kkt.passed,
        }, indent=2))
    else:
        _emit(args, format_solution(sol, [g.name for g in system.generators]))
        _emit(args, f"KKT audit   : {'PASS' if kkt.passed else 'FAIL'}")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _config(args)
    report = validate(cfg)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for f in report.findings:
            _emit(args, f"{f.status:<4}  {f.check}: {f.detail}")
        if report.spectral_radius is not None:
            _emit(args, f"spectral radius: {report.spectral_radius:.12f}")
    if args.out:
        io.write_json(report.to_dict(), _out_dir(args) / "check.json")
    return EXIT_OK if report.ok else EXIT_USAGE


def _sweep_one(cfg):
    trace = run(cfg, check=False)
    entry = {"summary": summarize_trace(trace)}
    entry.update(convergence_rounds(trace))
    return entry


def sweep_configs(cfg, param: str, values: list[str]):
    out = []
    for raw in values:
        if param == "eps":
            out.append((float(raw), with_protocol(cfg, eps=float(raw))))
        elif param == "mu":
            out.append((float(raw), with_protocol(cfg, mu=float(raw))))
        elif param == "sigma":
            try:
                out.append((raw, with_protocol(cfg, sigma=parse_sigma(raw))))
            except (ConfigError, ValueError) as exc:
                raise CliError(EXIT_USAGE, "config", str(exc)) from None
        else:
            raise CliError(EXIT_USAGE, "usage", f"unknown sweep parameter {param!r}")
    return out


def cmd_sweep(args) -> int:
    from dataclasses import replace

    cfg = _config(args)
    if args.horizon is not None:
        cfg = replace(cfg, horizon=args.horizon)
    if args.drop_events:
        cfg = replace(cfg, events=())
    cases = sweep_configs(cfg, args.param, args.values)
    for value, c in cases:
        report = validate(c)
        if not report.ok:
            raise CliError(EXIT_USAGE, "validation",
                           f"{args.param}={value}: " + "; ".join(f"{f.check}: {f.detail}" for f in report.failures))
    configs = [c for _, c in cases]
    try:
        if len(configs) > 1 and args.jobs != 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_sweep_one, configs))
        else:
            results = [_sweep_one(c) for c in configs]
    except SimulationError as exc:
        raise CliError(EXIT_SIM, "simulation", str(exc)) from None
    table = []
    for (value, _), res in zip(cases, results):
        table.append({"param": args.param, "value": value, **res})
    _emit(args, f"{args.param:>10} {'lambda_round':>13} {'p_mg_round':>11} {'settled_at':>11}")
    for row in table:
        _emit(args, f"{str(row['value']):>10} {str(row['lambda_round']):>13} {str(row['p_mg_round']):>11} "
                    f"{str(row['summary']['convergence_round']):>11}")
    if args.out:
        io.write_json(table, _out_dir(args) / "sweep.json")
    return EXIT_OK


def cmd_acceptance(args) -> int:
    target = Path(args.tests)
    if not target.exists():
        raise CliError(EXIT_USAGE, "usage", f"acceptance tests not found: {target}")
    return subprocess.call([sys.executable, "-m", "pytest", "-q", "-s", str(target)])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erdispatch", description="Distributed economic dispatch simulator.")
    parser.add_argument("--quiet", action="store_true", help="suppress human-readable output")
    parser.add_argument("--seed", type=int, default=None, help="reserved; runs are deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", nargs="?", help="scenario config file")
        p.add_argument("--config", dest="config_opt", metavar="PATH", help="scenario config file")
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
        return p

    p = with_config(sub.add_parser("run", help="simulate a scenario and write trace + summary"))
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--oracle-check", action="store_true", help="compare the final state with the oracle")
    p.add_argument("--long", action="store_true", help="also write trace_long.csv (round, variable, bus, value)")
    p.set_defaults(func=cmd_run)

    p = with_config(sub.add_parser("oracle", help="centralized optimum of the configured system"))
    p.add_argument("--mode", choices=("grid", "isolated"), default="grid")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_oracle)

    p = with_config(sub.add_parser("check", help="validate topology and step-size assumptions"))
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, metavar="DIR")
    p.set_defaults(func=cmd_check)

    p = with_config(sub.add_parser("sweep", help="run one scenario per parameter value"))
    p.add_argument("--param", choices=("eps", "mu", "sigma"), required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--horizon", type=int, default=None, help="override the configured horizon")
    p.add_argument("--drop-events", action="store_true", help="ignore scheduled events")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (1 = sequential)")
    p.add_argument("--out", default=None, metavar="DIR")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("acceptance", help="run the acceptance test module")
    p.add_argument("--tests", default="tests/test_acceptance.py")
    p.set_defaults(func=cmd_acceptance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": exc.message}), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
