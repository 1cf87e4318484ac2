"""Load hourly CSV files into :class:`HourlySeries` and repair short gaps."""
from __future__ import annotations

import csv
import enum
import io
import re
from dataclasses import asdict, dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, fmt_float
from .errors import (
    CadenceError,
    DuplicateTimestampError,
    EmptySeriesError,
    ParseError,
    UnrepairableGapError,
    ValidationError,
)
from .series import HOUR, HourlySeries, Quantity, check_unit

_OFFSET_RE = re.compile(r"^(?:UTC)?([+-])(\d{1,2})(?::?(\d{2}))?$")


def parse_timezone(spec: str) -> timezone:
    """``"UTC"``/``"Z"`` or a fixed offset such as ``"+01:00"``, ``"UTC+2"``, ``"-0500"``."""
    s = spec.strip()
    if s.upper() in ("UTC", "Z", "GMT", ""):
        return timezone.utc
    m = _OFFSET_RE.match(s.upper())
    if not m:
        raise ValidationError(f"unsupported timezone {spec!r}; use UTC or a fixed offset like +01:00")
    sign = 1 if m.group(1) == "+" else -1
    delta = timedelta(hours=int(m.group(2)), minutes=int(m.group(3) or 0))
    return timezone(sign * delta)


@dataclass(frozen=True)
class CsvSpec:
    area_code: str
    quantity: Quantity
    unit: str
    timestamp_column: str = "timestamp"
    value_column: str = "value"
    timezone: str = "UTC"
    decimal_separator: str = "."
    delimiter: str = ","

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        if self.timestamp_column == self.value_column:
            raise ValidationError("timestamp and value columns must differ")
        if self.decimal_separator not in (".", ","):
            raise ValidationError(f"decimal separator must be '.' or ',', got {self.decimal_separator!r}")
        if self.decimal_separator == self.delimiter:
            raise ValidationError("decimal separator and field delimiter must differ")
        check_unit(self.quantity, self.unit)
        parse_timezone(self.timezone)


class GapMode(str, enum.Enum):
    REJECT = "reject"
    FORWARD_FILL = "forward_fill"
    LINEAR_INTERPOLATE = "linear_interpolate"


@dataclass(frozen=True)
class GapPolicy:
    mode: GapMode = GapMode.LINEAR_INTERPOLATE
    max_gap_hours: int = 3

    def __post_init__(self):
        object.__setattr__(self, "mode", GapMode(self.mode))
        if int(self.max_gap_hours) < 1:
            raise ValidationError("max_gap_hours must be >= 1")


@dataclass(frozen=True)
class IngestReport:
    """Counts from one file load.

    ``gaps_found`` counts missing hours (absent rows plus empty cells).
    """

    path: str
    rows_read: int
    rows_dropped: int
    gaps_found: int
    gaps_filled: int
    first_timestamp: str
    last_timestamp: str

    def as_dict(self) -> dict:
        return asdict(self)


def _parse_timestamp(text: str, tz: timezone) -> datetime:
    s = text.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=tz)
    return ts.astimezone(timezone.utc)


def load_hourly_csv(path, spec: CsvSpec) -> tuple[HourlySeries, IngestReport]:
    path = Path(path)
    tz = parse_timezone(spec.timezone)
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySeriesError(f"{path}: file is empty") from None
        try:
            ti = header.index(spec.timestamp_column)
            vi = header.index(spec.value_column)
        except ValueError:
            raise ParseError(f"{path}: header {header} lacks {spec.timestamp_column!r} or {spec.value_column!r}",
                             row=1) from None
        stamps: list[datetime] = []
        values: list[float] = []
        rows: list[int] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                ts = _parse_timestamp(row[ti], tz)
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}: bad timestamp ({exc})", row=line_no) from None
            try:
                raw = row[vi].strip()
            except IndexError:
                raise ParseError(f"{path}: missing value column", row=line_no) from None
            if raw == "" or raw.lower() in ("nan", "n/a", "na"):
                val = np.nan
            else:
                if spec.decimal_separator == ",":
                    raw = raw.replace(".", "").replace(",", ".")
                try:
                    val = float(raw)
                except ValueError:
                    raise ParseError(f"{path}: bad value {row[vi]!r}", row=line_no) from None
            if ts.minute or ts.second or ts.microsecond:
                raise CadenceError(f"{path}: row {line_no} timestamp {ts.isoformat()} is not on an hour boundary")
            stamps.append(ts)
            values.append(val)
            rows.append(line_no)
    if not stamps:
        raise EmptySeriesError(f"{path}: no data rows")

    # A repeated timestamp directly after itself is the DST fall-back hour; anything else is corrupt.
    kept_ts: list[datetime] = []
    kept_val: list[float] = []
    seen: dict[datetime, int] = {}
    dropped = 0
    for ts, val, line_no in zip(stamps, values, rows):
        if ts in seen:
            if kept_ts and kept_ts[-1] == ts:
                dropped += 1
                continue
            raise DuplicateTimestampError(
                f"{path}: timestamp {ts.isoformat()} at row {line_no} duplicates row {seen[ts]}")
        seen[ts] = line_no
        kept_ts.append(ts)
        kept_val.append(val)

    order = sorted(range(len(kept_ts)), key=kept_ts.__getitem__)
    sorted_ts = [kept_ts[i] for i in order]
    if len(sorted_ts) > 2:
        steps = np.diff(np.array([t.timestamp() for t in sorted_ts])) / 3600.0
        if np.median(steps) > 1.0:
            raise CadenceError(f"{path}: median spacing is {np.median(steps):g} h, expected hourly data")
    start = sorted_ts[0]
    n = (sorted_ts[-1] - start) // HOUR + 1
    out = np.full(n, np.nan)
    for i in order:
        out[(kept_ts[i] - start) // HOUR] = kept_val[i]
    series = HourlySeries(spec.area_code, spec.quantity, spec.unit, start, out)
    gaps = int(np.isnan(out).sum())
    report = IngestReport(str(path), len(stamps), dropped, gaps, 0,
                          start.isoformat(), series.end.isoformat())
    return series, report


def _nan_runs(values: np.ndarray) -> list[tuple[int, int]]:
    """Half-open ``(lo, hi)`` index ranges of consecutive NaNs."""
    miss = np.isnan(values).astype(np.int8)
    edges = np.diff(np.concatenate(([0], miss, [0])))
    return list(zip(np.flatnonzero(edges == 1).tolist(), np.flatnonzero(edges == -1).tolist()))


def repair_series(series: HourlySeries, policy: GapPolicy = GapPolicy()) -> HourlySeries:
    """Fill short runs of missing hours; longer runs raise :class:`UnrepairableGapError`."""
    runs = _nan_runs(series.values)
    if not runs:
        return series
    values = series.values.copy()
    n = values.size
    for lo, hi in runs:
        first, last = series.timestamp(lo).isoformat(), series.timestamp(hi - 1).isoformat()
        length = hi - lo
        if policy.mode is GapMode.REJECT:
            raise UnrepairableGapError(f"gap of {length} h from {first} to {last} (gap policy: reject)", first, last)
        if length > policy.max_gap_hours:
            raise UnrepairableGapError(
                f"gap of {length} h from {first} to {last} exceeds max_gap_hours={policy.max_gap_hours}", first, last)
        if lo == 0:
            raise UnrepairableGapError(f"leading gap from {first} to {last} has no anchor value", first, last)
        left = values[lo - 1]
        if policy.mode is GapMode.FORWARD_FILL:
            values[lo:hi] = left
            continue
        if hi == n:
            raise UnrepairableGapError(f"trailing gap from {first} to {last} cannot be interpolated", first, last)
        right = values[hi]
        steps = np.arange(1, length + 1) / (length + 1)
        values[lo:hi] = left + (right - left) * steps
    return series.with_values(values)


def count_gaps(series: HourlySeries) -> int:
    return int(series.missing.sum())


def series_to_csv(series: HourlySeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp", "value"])
    for i, v in enumerate(series.values.tolist()):
        w.writerow([series.timestamp(i).isoformat(), fmt_float(v)])
    return buf.getvalue()


def write_series_csv(series: HourlySeries, path) -> Path:
    """Write the ``timestamp,value`` schema that :func:`load_hourly_csv` reads by default."""
    return atomic_write_text(path, series_to_csv(series))
