"""Sampled time series and their CSV representation."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

UNIFORM_RTOL = 1e-9
AXIS_RTOL = 1e-12


class GridError(ValueError):
    """Sampling grid is non-uniform or does not match another grid."""

    def __init__(self, message: str, deviation: float = float("nan")):
        super().__init__(message)
        self.deviation = deviation


class CSVFormatError(ValueError):
    """Malformed series CSV; ``line`` and ``column`` locate the first offense."""

    def __init__(self, message: str, line: int, column: Optional[int] = None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True, eq=False)
class Series:
    """Paired samples ``(times[i], values[i])``.

    Times are strictly increasing.  Values are finite, or NaN where a value
    is explicitly missing.  ``trace`` optionally records, per index, the
    stencil that produced the value (``None`` for a missing sentinel).
    """

    times: np.ndarray
    values: np.ndarray
    time_unit: str = "t"
    value_unit: str = "value"
    trace: Optional[tuple] = None

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or v.ndim != 1 or len(t) != len(v):
            raise ValueError("times and values must be 1-D and of equal length")
        if not np.all(np.isfinite(t)):
            raise ValueError("times must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(np.isinf(v)):
            raise ValueError("values must be finite or NaN")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


def check_uniform(times, rtol: float = UNIFORM_RTOL) -> float:
    """Return the spacing of a uniform grid.

    Raises :class:`GridError` when any step deviates from the mean step by
    more than ``rtol`` relative.
    """
    t = np.asarray(times, dtype=float)
    if len(t) < 2:
        raise GridError("at least two samples are needed to define a spacing")
    steps = np.diff(t)
    h = (t[-1] - t[0]) / (len(t) - 1)
    deviation = float(np.max(np.abs(steps - h)) / h)
    if deviation > rtol:
        raise GridError(f"non-uniform grid: max relative step deviation {deviation:.3e}", deviation)
    return float(h)


def check_same_axis(a: Series, b: Series, rtol: float = AXIS_RTOL) -> None:
    if len(a) != len(b):
        raise GridError(f"series lengths differ ({len(a)} vs {len(b)})")
    scale = max(float(np.max(np.abs(a.times))), 1.0)
    dev = float(np.max(np.abs(a.times - b.times))) / scale if len(a) else 0.0
    if dev > rtol:
        raise GridError(f"time axes differ by {dev:.3e} relative", dev)


def format_float(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def series_to_csv(series: Series) -> str:
    buf = io.StringIO()
    buf.write("t,value\n")
    for t, v in zip(series.times, series.values):
        buf.write(f"{format_float(t)},{format_float(v)}\n")
    return buf.getvalue()


def parse_series_csv(text: str) -> Series:
    """Parse ``t,value`` CSV text.

    Blank lines are skipped, ``nan`` (any case) marks a missing value and
    scientific notation is accepted.  Errors name the 1-based line.
    """
    lines = text.splitlines()
    rows = []
    header_seen = False
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if not header_seen:
            if [c.strip().lower() for c in row] != ["t", "value"]:
                raise CSVFormatError("expected header 't,value'", lineno)
            header_seen = True
            continue
        if len(row) != 2:
            raise CSVFormatError(f"expected 2 fields, found {len(row)}", lineno)
        parsed = []
        for col, cell in enumerate(row, start=1):
            cell = cell.strip()
            try:
                val = float(cell)
            except ValueError:
                raise CSVFormatError(f"cannot parse {cell!r} as a number", lineno, col) from None
            if math.isinf(val) or (math.isnan(val) and cell.lower() != "nan"):
                raise CSVFormatError(f"{cell!r} is not a finite number or 'nan'", lineno, col)
            if col == 1 and math.isnan(val):
                raise CSVFormatError("time cannot be missing", lineno, col)
            parsed.append(val)
        if rows and parsed[0] <= rows[-1][1][0]:
            raise CSVFormatError("times must be strictly increasing (duplicate or decreasing time)", lineno, 1)
        rows.append((lineno, parsed))
    if not header_seen:
        raise CSVFormatError("empty file; expected header 't,value'", 1)
    times = [r[1][0] for r in rows]
    values = [r[1][1] for r in rows]
    return Series(np.array(times, dtype=float), np.array(values, dtype=float))


def read_series_csv(path) -> Series:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_series_csv(fh.read())


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_series_csv(series: Series, path) -> None:
    atomic_write_text(path, series_to_csv(series))
