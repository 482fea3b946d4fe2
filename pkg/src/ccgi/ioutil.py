"""Small text/file helpers shared by the export paths.

All delimited output goes through these helpers so that number formatting
is identical everywhere: floats are rendered with 17 significant digits,
which round-trips IEEE doubles exactly and keeps repeated runs
byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path


def fmt_float(x) -> str:
    """Render a float with 17 significant digits (shortest exact form not used
    on purpose: a fixed precision keeps output stable across platforms)."""
    return format(float(x), ".17g")


def fmt_cell(x) -> str:
    """Render a CSV cell: floats via fmt_float, everything else via str()."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return fmt_float(x)
    return str(x)


def write_csv(path, header, rows) -> None:
    """Write an RFC-4180-style CSV (CRLF line endings, header row)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_cell(v) for v in row])


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()
