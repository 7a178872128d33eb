"""Deterministic CSV/JSON output: fixed 17-digit floats, fixed key order, config hash."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math

import numpy as np

SCHEMA_VERSION = 1


def fmt_float(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def _json(v, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        v = list(v)
        if not v:
            return "[]"
        if all(isinstance(x, (int, float, np.floating, np.integer)) and not isinstance(x, bool) for x in v):
            return "[" + ", ".join(_json(x, indent, level) for x in v) + "]"
        items = [pad + _json(x, indent, level + 1) for x in v]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, complex):
        return _json([v.real, v.imag], indent, level)
    return json.dumps(str(v))


def dumps(obj, indent: int = 2) -> str:
    return _json(obj, indent, 0) + "\n"


def envelope(command: str, config: dict, payload: dict) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "command": command, "config_hash": config_hash(config), "config": config}
    out.update(payload)
    return out


def write_csv(header_meta: dict, columns: list, rows: list) -> str:
    buf = io.StringIO()
    meta = " ".join(f"{k}={v}" for k, v in header_meta.items())
    buf.write(f"# {meta}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_float(x) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def read_csv(text: str):
    """(metadata dict, list of row dicts) from ``write_csv`` output."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("line 1: missing metadata comment")
    meta = dict(item.split("=", 1) for item in lines[0][2:].split())
    rows = list(csv.DictReader(lines[1:]))
    return meta, rows


def complex_pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def from_pair(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if not (isinstance(v, list) and len(v) == 2):
        raise ValueError(f"expected [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))
