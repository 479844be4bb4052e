"""Deterministic JSON/CSV emission with a versioned header."""
from __future__ import annotations

import math
import os

import numpy as np

from .constants import CONSTANTS_VERSION

FORMAT_VERSION = 1


def _fmt(x):
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_string(str(k))}: {_encode(v, indent, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "{" + f'"re": {_fmt(obj.real)}, "im": {_fmt(obj.imag)}' + "}"
    return _string(str(obj))


def _string(s):
    import json
    return json.dumps(s, ensure_ascii=False)


def dumps(obj):
    """JSON text with floats at 17 significant digits."""
    return _encode(obj, 2, 0) + "\n"


def provenance(config, seed_order="sobol(scrambled, seed=0), batches of 8"):
    return {"config_sha256": config.digest, "constants": CONSTANTS_VERSION,
            "seed_order": seed_order}


def bundle(command, payload, config):
    return {"format": "dispeq-result", "version": FORMAT_VERSION, "command": command,
            "provenance": provenance(config), "payload": payload}


def write_json(path, obj):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def write_csv(path, columns, rows, kind):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# dispeq-{kind} v{FORMAT_VERSION}\n")
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(format(float(v), ".17g") for v in r) + "\n")


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        head = fh.readline()
        if not head.startswith("# dispeq-"):
            raise ValueError(f"{path}: missing format header")
        cols = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return cols, data
