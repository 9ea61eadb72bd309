"""Deterministic CSV/JSON writers shared by the command-line front end.

Dialect: comma separator, '.' decimal point, one header row, LF line
endings, shortest round-trip float formatting.  No timestamps anywhere,
so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def write_matrix_coordinate(path, matrix) -> None:
    """Sparse matrix in (row, col, value) text form."""
    coo = matrix.tocoo()
    order = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))
    with open(path, "w") as fh:
        fh.write("row,col,value\n")
        for r, c, v in order:
            fh.write(f"{r},{c},{_fmt(float(v))}\n")
