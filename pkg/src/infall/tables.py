"""Column tables with metadata, written as CSV or JSON at full precision."""

from __future__ import annotations

import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["OutputTable", "write_table", "read_table", "format_number", "dumps_table"]


@dataclass
class OutputTable:
    columns: list[str]
    rows: list[list[float]]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise ValueError(f"row {i} has {len(row)} values, expected {n}")

    def column(self, name: str) -> list[float]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def format_number(x: float) -> str:
    """17 significant digits, '.' decimal point regardless of locale."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_number(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps_table(table: OutputTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        for key in table.metadata:
            buf.write(f"# {key}: {json.dumps(table.metadata[key], sort_keys=True, allow_nan=False, default=str)}\n")
        buf.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buf.write(",".join(format_number(v) for v in row) + "\n")
        return buf.getvalue()
    if fmt == "json":
        head = json.dumps({"metadata": table.metadata, "columns": table.columns},
                          sort_keys=True, indent=1, allow_nan=False, default=str)
        rows = ",\n  ".join("[" + ",".join(_json_number(v) for v in row) + "]" for row in table.rows)
        return head[:-2] + ',\n "rows": [\n  ' + rows + "\n ]\n}\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_table(table: OutputTable, fmt: str = "csv", path: str | os.PathLike | None = None) -> None:
    """Write ``table`` to ``path`` (standard output when ``None`` or ``"-"``).

    Files are written atomically through a temporary file in the same
    directory.
    """
    text = dumps_table(table, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write table to {str(path)!r}: {exc}") from exc


def read_table(path: str | os.PathLike, fmt: str | None = None) -> OutputTable:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "json":
        obj = json.loads(text)
        rows = [[math.nan if v is None else float(v) for v in row] for row in obj["rows"]]
        return OutputTable(list(obj["columns"]), rows, obj["metadata"])
    meta: dict = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, val = lines[i][2:].partition(": ")
        meta[key] = json.loads(val)
        i += 1
    columns = lines[i].split(",")
    rows = [[float(t) for t in line.split(",")] for line in lines[i + 1:] if line]
    return OutputTable(columns, rows, meta)
