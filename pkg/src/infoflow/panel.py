"""Time-series panels: CSV ingestion, validation, and forward differencing.

A panel holds d named series sampled on a uniform grid with step ``dt``.
Panels are immutable after construction and every operation here is pure,
so they are safe to share across threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CsvFormatError,
    CsvParseError,
    DataError,
    InsufficientDataError,
    InvalidStrideError,
    UsageError,
    ValidationError,
)

# Relative tolerance for declaring a time column uniformly spaced.
TIME_UNIFORMITY_RTOL = 1e-6

# Significant digits used when writing floats; 17 round-trips IEEE doubles.
CSV_FLOAT_DIGITS = 17


@dataclass(frozen=True, eq=False)
class TimeSeriesPanel:
    """d named series of n samples each, spaced ``dt`` time units apart.

    ``values`` has shape (d, n): one row per series, which keeps the
    covariance passes cache-friendly. The array is made read-only.
    """

    labels: tuple[str, ...]
    values: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("panel values must be a 2-D array (series, samples)")
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) != values.shape[0]:
            raise ValidationError(
                f"{len(labels)} labels for {values.shape[0]} series rows"
            )
        if len(labels) == 0:
            raise ValidationError("panel needs at least one series")
        if len(set(labels)) != len(labels):
            raise ValidationError("series labels must be unique")
        if values.shape[1] < 2:
            raise InsufficientDataError("panel needs at least 2 samples per series")
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValidationError(
                f"non-finite value in series {labels[bad[0]]!r} at sample {bad[1]}"
            )
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be a positive finite number, got {self.dt!r}")
        values.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def d(self) -> int:
        """Number of series."""
        return self.values.shape[0]

    @property
    def n(self) -> int:
        """Number of samples per series."""
        return self.values.shape[1]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(
                f"unknown series {label!r}; available: {', '.join(self.labels)}"
            ) from None

    def series(self, j: int) -> np.ndarray:
        return self.values[j]

    def window(self, start: int, length: int) -> "TimeSeriesPanel":
        """Sub-panel of ``length`` consecutive samples starting at ``start``."""
        if start < 0 or start + length > self.n:
            raise UsageError(f"window [{start}, {start + length}) outside 0..{self.n}")
        return TimeSeriesPanel(self.labels, self.values[:, start : start + length].copy(), self.dt)

    def with_series(self, j: int, new_values: np.ndarray) -> "TimeSeriesPanel":
        """Copy of the panel with series ``j`` replaced (used by surrogate tests)."""
        values = self.values.copy()
        values[j] = new_values
        return TimeSeriesPanel(self.labels, values, self.dt)


@dataclass(frozen=True, eq=False)
class DifferencedSeries:
    """Euler-forward derivative estimates of one series.

    Element m is (x[m+k] - x[m]) / (k*dt); the sequence has length n - k.
    """

    values: np.ndarray
    k: int
    source_label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def forward_difference(panel: TimeSeriesPanel, j: int, k: int = 1) -> DifferencedSeries:
    """Euler forward difference of series ``j`` with stride ``k``.

    Returns the derivative-scale series of length n - k whose element m is
    (x[m+k] - x[m]) / (k * dt). A linear ramp yields its slope exactly
    (up to floating round-off) for any stride.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidStrideError(f"stride k must be a positive integer, got {k!r}")
    if k >= panel.n:
        raise InvalidStrideError(f"stride k={k} must be smaller than n={panel.n}")
    row = panel.values[j]
    diff = (row[k:] - row[:-k]) / (k * panel.dt)
    return DifferencedSeries(values=diff, k=int(k), source_label=panel.labels[j])


def _default_labels(count: int) -> tuple[str, ...]:
    return tuple(f"c{i}" for i in range(count))


def ingest_csv(
    path,
    *,
    delimiter: str = ",",
    has_header: bool = True,
    time_column: str | None = None,
    dt_override: float | None = None,
) -> TimeSeriesPanel:
    """Read a delimited text file into a validated panel.

    Cells must be numeric apart from an optional time column. When a time
    column is named, dt is inferred from it and the grid is checked for
    uniformity (relative tolerance 1e-6); otherwise dt is ``dt_override``
    or 1.0. Missing values are rejected, never imputed.
    """
    if time_column is not None and dt_override is not None:
        raise UsageError("pass either time_column or dt_override, not both")
    if time_column is not None and not has_header:
        raise UsageError("time_column requires a header row")
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh, delimiter=delimiter) if row]
    except OSError as exc:
        raise DataError(f"cannot read input: {exc}") from exc

    if not rows:
        raise InsufficientDataError(f"{path}: empty file")

    if has_header:
        labels = tuple(cell.strip() for cell in rows[0])
        data_rows = rows[1:]
        first_data_line = 2
    else:
        labels = _default_labels(len(rows[0]))
        data_rows = rows
        first_data_line = 1

    if len(data_rows) < 2:
        raise InsufficientDataError(f"{path}: need at least 2 data rows, found {len(data_rows)}")

    width = len(labels)
    parsed = np.empty((len(data_rows), width), dtype=np.float64)
    for r, row in enumerate(data_rows):
        if len(row) != width:
            raise CsvFormatError(
                f"{path}: row {first_data_line + r} has {len(row)} cells, expected {width}"
            )
        for c, cell in enumerate(row):
            try:
                parsed[r, c] = float(cell)
            except ValueError:
                raise CsvParseError(
                    f"{path}: non-numeric value {cell.strip()!r} at row {first_data_line + r},"
                    f" column {labels[c]!r}"
                ) from None

    dt = 1.0 if dt_override is None else float(dt_override)
    if time_column is not None:
        if time_column not in labels:
            raise UsageError(f"{path}: no column named {time_column!r}")
        t_idx = labels.index(time_column)
        t = parsed[:, t_idx]
        if not np.isfinite(t).all():
            raise ValidationError(f"{path}: non-finite value in time column {time_column!r}")
        steps = np.diff(t)
        dt = (t[-1] - t[0]) / (len(t) - 1)
        if dt <= 0 or not np.all(steps > 0):
            raise CsvFormatError(f"{path}: time column {time_column!r} must strictly increase")
        off = np.abs(steps - dt) > TIME_UNIFORMITY_RTOL * abs(dt)
        if off.any():
            r = int(np.argmax(off))
            raise CsvFormatError(
                f"{path}: non-uniform time column {time_column!r} near row"
                f" {first_data_line + r + 1} (step {steps[r]!r} vs {dt!r})"
            )
        keep = [i for i in range(width) if i != t_idx]
        labels = tuple(labels[i] for i in keep)
        parsed = parsed[:, keep]

    bad = np.argwhere(~np.isfinite(parsed))
    if len(bad):
        r, c = bad[0]
        raise ValidationError(
            f"{path}: non-finite value at row {first_data_line + r}, column {labels[c]!r}"
        )

    return TimeSeriesPanel(labels=labels, values=parsed.T, dt=dt)


def format_float(x: float) -> str:
    """Decimal text at 17 significant digits; round-trips doubles exactly."""
    return format(float(x), f".{CSV_FLOAT_DIGITS}g")


def write_csv(
    panel: TimeSeriesPanel,
    fh,
    *,
    delimiter: str = ",",
    time_label: str | None = "t",
) -> None:
    """Write a panel in the same format ``ingest_csv`` reads.

    When ``time_label`` is given, a leading time column m*dt is included so
    that re-ingestion recovers dt without flags. Values are written at 17
    significant digits and round-trip bit-for-bit.
    """
    writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    header = ([time_label] if time_label else []) + list(panel.labels)
    writer.writerow(header)
    cols = panel.values.T
    for m in range(panel.n):
        row = [format_float(m * panel.dt)] if time_label else []
        row.extend(format_float(v) for v in cols[m])
        writer.writerow(row)
