"""CSV and JSON output with self-describing metadata headers.

Every CSV produced by the command line starts with '#'-prefixed metadata
lines (tool version, command, config hash, seeds) followed by a plain
column-name header row.  Readers that ignore '#' lines see an ordinary
CSV; the reader here returns the metadata as a dict alongside the data.
Floats are written with repr-level precision so a rerun with the same
seed produces byte-identical files.
"""

from __future__ import annotations

import json
import os
from typing import Mapping, Sequence

import numpy as np

_FLOAT_FMT = "%.17g"


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    return str(value)


def write_csv(path, columns: Mapping[str, Sequence], meta: Mapping[str, str] | None = None) -> None:
    """Write named columns with optional '# key: value' metadata lines."""
    names = list(columns)
    if not names:
        raise ValueError("write_csv needs at least one column")
    arrays = [np.asarray(columns[name]) for name in names]
    n = arrays[0].shape[0]
    for name, arr in zip(names, arrays):
        if arr.ndim != 1 or arr.shape[0] != n:
            raise ValueError(f"column '{name}' is not a length-{n} 1-d array")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}: {value}\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(format_value(arr[i]) for arr in arrays) + "\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv`.

    Returns ``(meta, columns)`` where ``meta`` maps metadata keys to their
    string values and ``columns`` maps column names to float arrays.
    """
    meta: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        line = fh.readline()
        while line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            line = fh.readline()
        if not line:
            raise ValueError(f"{path}: no header row")
        names = [c.strip() for c in line.strip().split(",")]
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(names))
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: {data.shape[1]} data columns for {len(names)} names")
    columns = {name: np.ascontiguousarray(data[:, j]) for j, name in enumerate(names)}
    return meta, columns


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
