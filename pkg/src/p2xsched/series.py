"""Hourly series containers, price/intensity pairing and normalization frames."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyOverlapError, EmptySeriesError, FrameError, UnitError, ValidationError

HOUR = timedelta(hours=1)


class Quantity(str, enum.Enum):
    PRICE = "price"
    CO2_INTENSITY = "co2_intensity"
    GENERATION = "generation"


UNITS = {
    Quantity.PRICE: ("EUR/MWh",),
    Quantity.CO2_INTENSITY: ("gCO2eq/kWh", "gCO2/kWh"),
    Quantity.GENERATION: ("MWh", "MW"),
}

DEFAULT_UNIT = {q: units[0] for q, units in UNITS.items()}


def check_unit(quantity, unit: str) -> None:
    quantity = Quantity(quantity)
    if unit not in UNITS[quantity]:
        raise UnitError(f"unit {unit!r} is not valid for {quantity.value} (expected one of {UNITS[quantity]})")


def as_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """Gap-free hourly index; value ``i`` belongs to ``start + i`` hours.

    Missing hours are NaN.
    """

    area_code: str
    quantity: Quantity
    unit: str
    start: datetime
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        check_unit(self.quantity, self.unit)
        start = as_utc(self.start)
        if start.minute or start.second or start.microsecond:
            raise ValidationError(f"series start {start.isoformat()} is not on an hour boundary")
        object.__setattr__(self, "start", start)
        values = _frozen_array(self.values)
        if values.ndim != 1 or values.size == 0:
            raise EmptySeriesError("an hourly series needs at least one value")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> datetime:
        """Timestamp of the last hour (inclusive)."""
        return self.start + (len(self) - 1) * HOUR

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def timestamp(self, i: int) -> datetime:
        return self.start + int(i) * HOUR

    def timestamps(self) -> list[datetime]:
        return [self.start + i * HOUR for i in range(len(self))]

    def offset_of(self, ts: datetime) -> int:
        """Hour offset of ``ts`` from ``start`` (may be negative or past the end)."""
        delta = as_utc(ts) - self.start
        hours, rem = divmod(delta, HOUR)
        if rem:
            raise ValidationError(f"{ts.isoformat()} is not on the hourly grid of this series")
        return hours

    def with_values(self, values) -> "HourlySeries":
        return HourlySeries(self.area_code, self.quantity, self.unit, self.start, values)

    def window(self, first: datetime, last: datetime) -> "HourlySeries":
        """Sub-series covering ``first``..``last`` inclusive, clipped to the data."""
        lo = max(self.offset_of(first), 0)
        hi = min(self.offset_of(last), len(self) - 1)
        if hi < lo:
            raise EmptyOverlapError(f"{first.isoformat()}..{last.isoformat()} does not overlap the series")
        return HourlySeries(self.area_code, self.quantity, self.unit, self.timestamp(lo), self.values[lo:hi + 1])

    def __eq__(self, other):
        if not isinstance(other, HourlySeries):
            return NotImplemented
        return (
            self.area_code == other.area_code
            and self.quantity == other.quantity
            and self.unit == other.unit
            and self.start == other.start
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None


@dataclass(frozen=True)
class HourPoint:
    index: int
    price: float
    intensity: float


@dataclass(frozen=True, eq=False)
class PairedPoints:
    """Struct-of-arrays view of hours where both price and intensity exist.

    ``index`` holds hour offsets from ``start``; order is chronological.
    """

    start: datetime
    index: np.ndarray
    price: np.ndarray
    intensity: np.ndarray
    area_code: str = ""

    def __post_init__(self):
        idx = np.array(self.index, dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "price", _frozen_array(self.price))
        object.__setattr__(self, "intensity", _frozen_array(self.intensity))
        object.__setattr__(self, "start", as_utc(self.start))
        if not (idx.shape == self.price.shape == self.intensity.shape):
            raise ValidationError("index, price and intensity must have equal length")

    @classmethod
    def from_arrays(cls, price, intensity, start=None, area_code="") -> "PairedPoints":
        price = np.asarray(price, dtype=np.float64)
        if start is None:
            start = datetime(2018, 1, 1, tzinfo=timezone.utc)
        return cls(start, np.arange(price.size), price, intensity, area_code)

    def __len__(self) -> int:
        return self.index.size

    def __iter__(self) -> Iterator[HourPoint]:
        for i, p, c in zip(self.index.tolist(), self.price.tolist(), self.intensity.tolist()):
            yield HourPoint(i, p, c)

    def __getitem__(self, item) -> "PairedPoints":
        if isinstance(item, (int, np.integer)):
            item = slice(item, item + 1 if item != -1 else None)
        return PairedPoints(self.start, self.index[item], self.price[item], self.intensity[item], self.area_code)

    def timestamps(self) -> list[datetime]:
        return [self.start + i * HOUR for i in self.index.tolist()]

    def take(self, positions) -> "PairedPoints":
        positions = np.asarray(positions, dtype=np.int64)
        return self[positions]

    def scaled(self, price_factor=1.0, intensity_factor=1.0) -> "PairedPoints":
        return PairedPoints(self.start, self.index, self.price * price_factor,
                            self.intensity * intensity_factor, self.area_code)


def pair_series(price: HourlySeries, intensity: HourlySeries) -> PairedPoints:
    """Pair a price series with an intensity series hour by hour.

    Hours missing in either input are dropped; indices are offsets from the
    start of the overlap.
    """
    if price.quantity is not Quantity.PRICE:
        raise UnitError(f"first series must be a price series, got {price.quantity.value}")
    if intensity.quantity is not Quantity.CO2_INTENSITY:
        raise UnitError(f"second series must be a CO2 intensity series, got {intensity.quantity.value}")
    if price.area_code != intensity.area_code:
        raise ValidationError(f"area mismatch: {price.area_code!r} vs {intensity.area_code!r}")
    first = max(price.start, intensity.start)
    last = min(price.end, intensity.end)
    if last < first:
        raise EmptyOverlapError(
            f"price {price.start.isoformat()}..{price.end.isoformat()} and intensity "
            f"{intensity.start.isoformat()}..{intensity.end.isoformat()} do not overlap"
        )
    n = (last - first) // HOUR + 1
    p0 = price.offset_of(first)
    c0 = intensity.offset_of(first)
    p = price.values[p0:p0 + n]
    c = intensity.values[c0:c0 + n]
    keep = ~(np.isnan(p) | np.isnan(c))
    return PairedPoints(first, np.flatnonzero(keep), p[keep], c[keep], price.area_code)


@dataclass(frozen=True)
class NormalizationFrame:
    price_min: float
    price_max: float
    intensity_min: float
    intensity_max: float

    def __post_init__(self):
        if not (self.price_max > self.price_min):
            raise FrameError(f"degenerate price range [{self.price_min}, {self.price_max}]")
        if not (self.intensity_max > self.intensity_min):
            raise FrameError(f"degenerate intensity range [{self.intensity_min}, {self.intensity_max}]")

    @classmethod
    def from_points(cls, points: PairedPoints) -> "NormalizationFrame":
        if len(points) == 0:
            raise FrameError("cannot build a normalization frame from zero points")
        return cls(float(points.price.min()), float(points.price.max()),
                   float(points.intensity.min()), float(points.intensity.max()))

    @classmethod
    def identity(cls) -> "NormalizationFrame":
        """Raw-units frame: normalization leaves values untouched."""
        return cls(0.0, 1.0, 0.0, 1.0)


def normalize_points(points: PairedPoints | Sequence[HourPoint], frame: NormalizationFrame):
    """Min-max scale prices to x and intensities to y using ``frame``.

    Returns two arrays ``(x, y)``.  Values outside the frame map outside [0, 1].
    """
    if not isinstance(frame, NormalizationFrame):
        raise FrameError("a NormalizationFrame is required")
    if isinstance(points, PairedPoints):
        price, intensity = points.price, points.intensity
    else:
        price = np.array([p.price for p in points], dtype=np.float64)
        intensity = np.array([p.intensity for p in points], dtype=np.float64)
    x = (price - frame.price_min) / (frame.price_max - frame.price_min)
    y = (intensity - frame.intensity_min) / (frame.intensity_max - frame.intensity_min)
    return x, y
