"""Bit-stable report emission: canonical JSON summary, CSV tables, plot series.

All floating-point output uses 17 significant digits, keys are sorted, rows
are ordered by lambda, and nothing time- or host-dependent is written, so
identical configs (and seed) reproduce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from importlib import resources


def format_float(x):
    """17-significant-digit decimal form (round-trips doubles)."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def canonical_json(obj):
    """Deterministic JSON text with .17g floats and sorted keys."""

    def emit(o):
        if isinstance(o, dict):
            items = sorted(o.items(), key=lambda kv: str(kv[0]))
            inner = ",".join(f"{json.dumps(str(k))}:{emit(v)}" for k, v in items)
            return "{" + inner + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(emit(v) for v in o) + "]"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, float):
            if math.isnan(o) or math.isinf(o):
                return json.dumps(format_float(o))
            return format(o, ".17g")
        if isinstance(o, int):
            return str(o)
        if o is None:
            return "null"
        return json.dumps(str(o))

    return emit(obj) + "\n"


def validate_report(obj, schema=None):
    """Check a summary dict against the shipped structural schema.

    Supports the subset of JSON-schema used by data/report_schema.json:
    type, required, properties, items, minItems, enum.  Returns a list of
    violation strings (empty when valid).
    """
    if schema is None:
        schema = load_schema()
    errors = []

    def check(o, sch, path):
        t = sch.get("type")
        if t:
            ok = {
                "object": lambda v: isinstance(v, dict),
                "array": lambda v: isinstance(v, (list, tuple)),
                "string": lambda v: isinstance(v, str),
                "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
                "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
                "boolean": lambda v: isinstance(v, bool),
            }[t](o)
            if not ok:
                errors.append(f"{path}: expected {t}")
                return
        for req in sch.get("required", []):
            if not isinstance(o, dict) or req not in o:
                errors.append(f"{path}: missing required key {req!r}")
        for key, sub in sch.get("properties", {}).items():
            if isinstance(o, dict) and key in o:
                check(o[key], sub, f"{path}.{key}")
        if "items" in sch and isinstance(o, (list, tuple)):
            for i, v in enumerate(o):
                check(v, sch["items"], f"{path}[{i}]")
        if "minItems" in sch and isinstance(o, (list, tuple)):
            if len(o) < sch["minItems"]:
                errors.append(f"{path}: fewer than {sch['minItems']} items")
        if "enum" in sch and o not in sch["enum"]:
            errors.append(f"{path}: {o!r} not in {sch['enum']}")

    check(obj, schema, "$")
    return errors


def load_schema():
    with resources.files("wedgecmc").joinpath("data/report_schema.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def emit_report(summary, tables, series, out_dir, emit="all"):
    """Write the run report; returns the list of written paths.

    summary: the JSON-able dict (validated against the shipped schema by the
    caller or tests).  tables: {name: (header, rows)} CSVs with fixed
    documented headers.  series: {name: [(lambda, value), ...]} plot-ready
    two-column text files.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if emit in ("json", "all"):
        path = os.path.join(out_dir, "summary.json")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(canonical_json(summary))
        written.append(path)
    if emit in ("csv", "all"):
        for name in sorted(tables):
            header, rows = tables[name]
            written.append(_write_csv(os.path.join(out_dir, f"{name}.csv"), header, rows))
        series_dir = os.path.join(out_dir, "series")
        os.makedirs(series_dir, exist_ok=True)
        for name in sorted(series):
            path = os.path.join(series_dir, f"{name}.txt")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                for lam, val in series[name]:
                    fh.write(f"{format_float(float(lam))} {format_float(float(val))}\n")
            written.append(path)
    return written
