"""Plain-text snapshot format and atomic file output.

A ``torus-field v1`` file is a header line ``torus-field v1 n=<n>`` followed by
``n`` rows of ``n`` space-separated values; row ``i`` holds the x1 index ``i``.
Values are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

HEADER = "torus-field v1"


def format_field(values: np.ndarray) -> str:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"expected a square 2D array, got shape {values.shape}")
    n = values.shape[0]
    lines = [f"{HEADER} n={n}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in values]
    return "\n".join(lines) + "\n"


def parse_field(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty field file")
    head = lines[0].split()
    if len(head) != 3 or " ".join(head[:2]) != HEADER or not head[2].startswith("n="):
        raise ValueError(f"bad header {lines[0]!r}")
    n = int(head[2][2:])
    rows = lines[1:]
    if len(rows) != n:
        raise ValueError(f"expected {n} rows, found {len(rows)}")
    values = np.array([[float(tok) for tok in row.split()] for row in rows])
    if values.shape != (n, n):
        raise ValueError(f"expected {n} values per row")
    return values


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_field(path, values: np.ndarray) -> Path:
    return atomic_write(path, format_field(values))


def read_field(path) -> np.ndarray:
    return parse_field(Path(path).read_text(encoding="utf-8"))


def write_flow_map(prefix, flow) -> tuple[Path, Path]:
    """Dump the two displacement components of a ``FlowMap``."""
    prefix = str(prefix)
    return (write_field(prefix + "_disp1.txt", flow.disp[..., 0]),
            write_field(prefix + "_disp2.txt", flow.disp[..., 1]))
