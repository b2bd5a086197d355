"""CSV and JSON report writers with 17-significant-digit floats.

Output bytes depend only on the values written, so reruns of the same
configuration produce identical files.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, ".17g")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_csv(path, columns, rows):
    """Header line plus one line per row; an empty series gives a header-only file."""
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, header has {len(columns)}")
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def to_json(value, indent=0):
    """Serialize dicts, lists, numbers and strings; non-finite floats become strings."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = format_float(value)
        if not math.isfinite(float(value)):
            return f'"{text}"'
        # keep floats recognisable as floats when they print like integers
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(value, str):
        return _json_string(value)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{_json_string(str(k))}: {to_json(v, indent + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{to_json(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _json_string(s):
    return json.dumps(s, ensure_ascii=False)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_json(obj) + "\n")


@dataclass
class Verdict:
    """One PASS/FAIL line: the invariant checked, its tolerance and the observed value."""

    invariant: str
    tolerance: object
    value: object
    passed: bool

    def as_dict(self):
        return {"invariant": self.invariant, "tolerance": self.tolerance,
                "value": self.value, "passed": bool(self.passed)}


@dataclass
class Report:
    name: str
    experiment: str
    csv_columns: list
    csv_rows: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def summary(self, config_echo, solver_version):
        return {
            "name": self.name,
            "experiment": self.experiment,
            "solver_version": solver_version,
            "passed": self.passed,
            "verdicts": [v.as_dict() for v in self.verdicts],
            "results": self.results,
            "notes": list(self.notes),
            "config": config_echo,
        }


def emit_report(report, out_dir, config_echo, solver_version):
    """Write ``<out>/<name>.csv`` and ``<out>/<name>.summary.json``; return both paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{report.name}.csv")
    json_path = os.path.join(out_dir, f"{report.name}.summary.json")
    write_csv(csv_path, report.csv_columns, report.csv_rows)
    write_json(json_path, report.summary(config_echo, solver_version))
    return csv_path, json_path


def fit_block(fit):
    if fit is None:
        return None
    return {
        "fitted_N": fit.fitted_N,
        "fitted_logC": fit.fitted_logC,
        "r_squared": fit.r_squared,
        "identically_zero": fit.identically_zero,
        "decay_slope": fit.decay_slope,
    }
