"""CSV output with '#'-prefixed header lines, written atomically."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.12g"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True, default=_json_default)
    return str(value)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serialisable")


def atomic_write(path, text: str):
    """Write ``text`` so that ``path`` is either complete or absent."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(names, columns, header: dict | None = None) -> str:
    lines = [f"# {k}: {_fmt(v)}" for k, v in (header or {}).items()]
    lines.append(",".join(names))
    cols = [np.asarray(c) for c in columns]
    for row in zip(*cols):
        lines.append(",".join(_fmt(float(x)) if np.isscalar(x) and not isinstance(x, str) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def write_table(path, names, columns, header: dict | None = None):
    atomic_write(path, format_table(names, columns, header))


def read_header(path) -> dict:
    """Header lines of a file written by :func:`write_table` as a dict of strings."""
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            out[key] = value
    return out


def read_table(path) -> tuple[dict, dict[str, np.ndarray]]:
    header = read_header(path)
    with open(path) as fh:
        rows = [line.rstrip("\n") for line in fh if not line.startswith("#")]
    names = rows[0].split(",")
    data = [r.split(",") for r in rows[1:] if r]
    cols = {}
    for i, name in enumerate(names):
        raw = [r[i] for r in data]
        try:
            cols[name] = np.array([float(x) for x in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return header, cols
