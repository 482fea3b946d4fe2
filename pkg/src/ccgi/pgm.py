"""Plain-ASCII PGM (P2) reading and writing.

Used for phantom and reconstruction image exports; maxval is 65535
throughout the toolkit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError

DEFAULT_MAXVAL = 65535


def write_pgm(path, values: np.ndarray, maxval: int = DEFAULT_MAXVAL) -> None:
    """Write a 2-D array of integers in [0, maxval] as plain PGM (P2)."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ParameterError(f"PGM image must be 2-D, got shape {values.shape}")
    if values.min() < 0 or values.max() > maxval:
        raise ParameterError("PGM values out of range [0, maxval]")
    rows, cols = values.shape
    lines = [f"P2", f"{cols} {rows}", f"{maxval}"]
    for r in range(rows):
        lines.append(" ".join(str(int(v)) for v in values[r]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a plain PGM (P2) file; returns (values, maxval). Comments allowed."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ParameterError(f"{path}: not a plain PGM (P2) file")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if data.size != rows * cols:
        raise ParameterError(f"{path}: expected {rows * cols} samples, got {data.size}")
    return data.reshape(rows, cols), maxval
