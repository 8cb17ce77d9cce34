"""Simulation traces and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from sehasel.errors import DataError
from sehasel.sysid import fill_gaps

COLUMNS = ("t", "u_i", "u_o", "mag_cmd", "x_b", "x_a", "target", "load_force", "disturbance")


@dataclass
class SimTrace:
    """Recorded columns, all of equal length. Units: s, V, m, N."""

    columns: dict

    def __post_init__(self):
        missing = [c for c in COLUMNS if c not in self.columns]
        if missing:
            raise DataError(f"missing columns: {', '.join(missing)}")
        lengths = {len(self.columns[c]) for c in COLUMNS}
        if len(lengths) != 1:
            raise DataError("columns have different lengths")
        self.columns = {c: np.asarray(self.columns[c], dtype=float) for c in COLUMNS}

    def __getattr__(self, name):
        cols = self.__dict__.get("columns", {})
        if name in cols:
            return cols[name]
        raise AttributeError(name)

    def __len__(self):
        return len(self.columns["t"])

    @property
    def dt(self) -> float:
        t = self.columns["t"]
        return float(t[1] - t[0]) if len(t) > 1 else 0.0

    def window(self, t0: float, t1: float = np.inf) -> "SimTrace":
        t = self.columns["t"]
        keep = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
        return SimTrace({c: v[keep] for c, v in self.columns.items()})

    def at(self, t: float, column: str = "x_a") -> float:
        """Value of ``column`` at the recorded sample nearest to ``t``."""
        idx = int(np.argmin(np.abs(self.columns["t"] - t)))
        return float(self.columns[column][idx])


def format_csv(trace: SimTrace) -> str:
    out = io.StringIO()
    out.write(",".join(COLUMNS) + "\n")
    data = np.column_stack([trace.columns[c] for c in COLUMNS])
    for row in data:
        out.write(",".join("%.9g" % v for v in row) + "\n")
    return out.getvalue()


def write_csv(trace: SimTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(trace))


def read_csv(path, max_gap: int = 3) -> SimTrace:
    """Read a trace; empty cells or ``nan`` count as missing and short gaps are interpolated."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: missing columns {', '.join(missing)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) if v.strip() else np.nan for v in row])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    cols = {}
    for c in COLUMNS:
        cols[c] = fill_gaps(data[:, header.index(c)], max_gap)
    return SimTrace(cols)
