"""Trace and summary serialization."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .scenario import SimulationTrace


def write_trace_csv(trace: SimulationTrace, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trace.columns())
        for row in trace.rows():
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return path


def write_trace_json(trace: SimulationTrace, path: str | Path) -> Path:
    path = Path(path)
    cols = trace.columns()
    records = [dict(zip(cols, row)) for row in trace.rows()]
    for rec, r in zip(records, trace.records):
        rec["events"] = list(r.events)
    path.write_text(json.dumps({"columns": cols, "rows": records}, indent=1) + "\n")
    return path


def write_trace_long(trace: SimulationTrace, path: str | Path) -> Path:
    """Plot-ready long format: one ``round,variable,bus,value`` row per sample.

    Per-bus columns such as ``lambda_3`` become ``variable=lambda, bus=3``;
    aggregates get an empty bus field.
    """
    path = Path(path)
    cols = trace.columns()
    split = []
    for name in cols[1:]:
        head, _, tail = name.rpartition("_")
        split.append((head, tail) if tail.isdigit() else (name, ""))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "variable", "bus", "value"])
        for row in trace.rows():
            for (var, bus), v in zip(split, row[1:]):
                writer.writerow([row[0], var, bus, repr(float(v)) if isinstance(v, float) else v])
    return path


def read_trace_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        return columns, [row for row in reader]


def write_json(obj, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path
