"""Byte-stable CSV/JSON writers (shortest round-trip float repr)."""
from __future__ import annotations

import json
import math

import numpy as np


def fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_csv(path, columns, data, header=None):
    cols = [np.asarray(d) for d in data]
    n = len(cols[0]) if cols else 0
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write("# " + header + "\n")
        fh.write(",".join(columns) + "\n")
        for r in range(n):
            fh.write(",".join(fmt(c[r]) for c in cols) + "\n")


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    cols = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    arr = np.array(rows) if rows else np.zeros((0, len(cols)))
    return {c: arr[:, k] for k, c in enumerate(cols)}


def _clean(o):
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.ndarray):
        return [_clean(v) for v in o.tolist()]
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if math.isfinite(v) else None
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return o


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
