"""Deterministic report serialization.

Floats are written with 17 significant digits and non-finite values as
strings such as ``"inf"``, so the same payload always produces the same
bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

CSV_COLUMNS = (
    "index", "name", "sweep_value", "n", "alpha", "q1", "q2", "gamma1", "gamma2",
    "finpot", "tail_moment", "radialcond", "local_r1", "local_r2",
    "limc1", "limc2", "limsup1", "limsup2",
    "con2_ok", "con2_1", "con2_2", "c114_ok", "c114_1", "c114_2",
    "converged", "iterations", "lambda_sub", "lambda_super", "residual",
    "c_low1", "c_low2", "c_up1", "c_up2", "bounds_stable", "ok",
)


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-ready builtins."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys and fixed float formatting."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v).strip('"')
    return str(v)


def csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def trace_csv(trace_u, trace_v) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("iter", "residual_u", "residual_v"))
    for k, (a, b) in enumerate(zip(trace_u, trace_v), start=1):
        writer.writerow((k, _cell(float(a)), _cell(float(b))))
    return buf.getvalue()


def write_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from None
