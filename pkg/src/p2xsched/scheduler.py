"""Trade-off line selection and FLH-constrained schedules.

Hours are scored in min-max normalized (price, intensity) coordinates with
``s = x*sin(theta) + y*cos(theta)``; the line ``s = c`` is the trade-off line
and hours with ``s <= c`` lie below it.  ``theta = 90`` scores price only,
``theta = 0`` intensity only.
"""
from __future__ import annotations

import calendar
import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import CapacityError, FrameError, ValidationError
from .series import HOUR, NormalizationFrame, PairedPoints, normalize_points

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class Strategy(str, enum.Enum):
    DAILY = "daily"
    MONTHLY = "monthly"
    YEARLY = "yearly"


class Rule(str, enum.Enum):
    BELOW_LINE = "below_line"
    NEAREST_TO_LINE = "nearest_to_line"
    END_OF_PERIOD_BLOCK = "end_of_period_block"


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= 90.0:
        raise ValidationError(f"theta must be within [0, 90] degrees, got {theta}")
    return theta


def tradeoff_weights(theta: float) -> tuple[float, float]:
    """(price weight, intensity weight); exact at the pure angles."""
    theta = _check_theta(theta)
    if theta == 90.0:
        return 1.0, 0.0
    if theta == 0.0:
        return 0.0, 1.0
    # cos via sin(90 - theta) keeps the two weights bit-identical at 45 degrees
    return math.sin(math.radians(theta)), math.sin(math.radians(90.0 - theta))


def tradeoff_score(x, y, theta: float):
    wp, wc = tradeoff_weights(theta)
    return x * wp + y * wc


def _frame(points: PairedPoints, frame: NormalizationFrame | None) -> NormalizationFrame:
    return NormalizationFrame.from_points(points) if frame is None else frame


def point_scores(points: PairedPoints, theta: float, frame: NormalizationFrame | None = None) -> np.ndarray:
    x, y = normalize_points(points, _frame(points, frame))
    return tradeoff_score(x, y, theta)


def rank_order(scores: np.ndarray, price: np.ndarray, index: np.ndarray) -> np.ndarray:
    """Positions sorted by score, then raw price, then hour index."""
    return np.lexsort((index, price, scores))


def k_lowest_positions(points: PairedPoints, theta: float, k: int,
                       frame: NormalizationFrame | None = None) -> np.ndarray:
    if not 0 <= k <= len(points):
        raise CapacityError(f"cannot select {k} hours from {len(points)} available")
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    scores = point_scores(points, theta, frame)
    return np.sort(rank_order(scores, points.price, points.index)[:k])


def select_k_lowest(points: PairedPoints, theta: float, k: int,
                    frame: NormalizationFrame | None = None) -> np.ndarray:
    """Hour indices of the ``k`` lowest-scoring points, ascending.

    ``frame`` defaults to the min-max range of ``points`` themselves.
    """
    return points.index[k_lowest_positions(points, theta, k, frame)]


@dataclass(frozen=True)
class TradeoffLine:
    theta: float
    intercept: float
    frame: NormalizationFrame
    k_ref: int

    def __post_init__(self):
        _check_theta(self.theta)

    def scores(self, points: PairedPoints) -> np.ndarray:
        return point_scores(points, self.theta, self.frame)


def calibrate_line(reference: PairedPoints, theta: float, k_ref: int,
                   frame: NormalizationFrame | None = None) -> TradeoffLine:
    """Slide the line out from the origin until it encloses ``k_ref`` reference points."""
    if not 0 <= k_ref <= len(reference):
        raise CapacityError(f"cannot calibrate on {k_ref} of {len(reference)} reference hours")
    frame = _frame(reference, frame)
    if k_ref == 0:
        return TradeoffLine(theta, -math.inf, frame, 0)
    scores = point_scores(reference, theta, frame)
    c = float(np.partition(scores, k_ref - 1)[k_ref - 1])
    return TradeoffLine(theta, c, frame, k_ref)


def below_line_positions(line: TradeoffLine, candidates: PairedPoints, cap: int | None = None) -> np.ndarray:
    if len(candidates) == 0:
        return np.zeros(0, dtype=np.int64)
    scores = line.scores(candidates)
    pos = np.flatnonzero(scores <= line.intercept)
    if cap is not None and pos.size > cap:
        order = rank_order(scores[pos], candidates.price[pos], candidates.index[pos])
        pos = np.sort(pos[order[:cap]])
    return pos


def select_below_line(line: TradeoffLine, candidates: PairedPoints, cap: int | None = None) -> np.ndarray:
    """Hour indices on or below the line; ``cap`` keeps only the lowest-scoring ones."""
    return candidates.index[below_line_positions(line, candidates, cap)]


# -- periods and quotas ---------------------------------------------------------

def absolute_hours(points: PairedPoints) -> np.ndarray:
    """Hours since the Unix epoch for every point."""
    return (points.start - EPOCH) // HOUR + points.index


def _local_datetime(abs_hour: int, offset_hours: int) -> datetime:
    return EPOCH + timedelta(hours=int(abs_hour) + offset_hours)


def period_key(abs_hour: int, strategy: Strategy, offset_hours: int = 0) -> str:
    t = _local_datetime(abs_hour, offset_hours)
    if strategy is Strategy.DAILY:
        return t.strftime("%Y-%m-%d")
    if strategy is Strategy.MONTHLY:
        return t.strftime("%Y-%m")
    return t.strftime("%Y")


def _period_hours(key: str, strategy: Strategy) -> int:
    if strategy is Strategy.DAILY:
        return 24
    year = int(key[:4])
    if strategy is Strategy.MONTHLY:
        return 24 * calendar.monthrange(year, int(key[5:7]))[1]
    return 24 * (366 if calendar.isleap(year) else 365)


@dataclass(frozen=True)
class Period:
    key: str
    first_hour: int
    last_hour: int

    @property
    def span(self) -> int:
        return self.last_hour - self.first_hour + 1


def horizon_periods(first_hour: int, last_hour: int, strategy: Strategy, offset_hours: int = 0) -> list[Period]:
    """Split the absolute hour range into local calendar periods, in order."""
    periods: list[Period] = []
    h = first_hour
    while h <= last_hour:
        key = period_key(h, strategy, offset_hours)
        t = _local_datetime(h, offset_hours)
        if strategy is Strategy.DAILY:
            nxt = datetime(t.year, t.month, t.day, tzinfo=timezone.utc) + timedelta(days=1)
        elif strategy is Strategy.MONTHLY:
            nxt = datetime(t.year + (t.month == 12), t.month % 12 + 1, 1, tzinfo=timezone.utc)
        else:
            nxt = datetime(t.year + 1, 1, 1, tzinfo=timezone.utc)
        end = (nxt - EPOCH) // HOUR - offset_hours - 1
        periods.append(Period(key, h, min(end, last_hour)))
        h = end + 1
    return periods


def horizon_target(flh_year: int, n_hours: int) -> int:
    """FLH budget scaled to a horizon of ``n_hours`` (exact for a 8760-hour year)."""
    return min(n_hours, int(math.floor(flh_year * n_hours / 8760 + 0.5)))


def apportion(total: int, weights, capacity=None) -> list[int]:
    """Largest-remainder split of ``total`` by ``weights``.

    Ties in the remainder go to earlier periods.  Periods that would exceed
    their ``capacity`` are pinned to it and the rest is re-split.
    """
    w = np.asarray(weights, dtype=np.float64)
    cap = np.full(w.size, max(int(total), 0)) if capacity is None else np.asarray(capacity, dtype=np.int64)
    if total > cap.sum():
        raise CapacityError(f"cannot place {total} hours in periods holding {int(cap.sum())}")
    out = np.zeros(w.size, dtype=np.int64)
    free = np.ones(w.size, dtype=bool)
    left_total = total
    while True:
        idx = np.flatnonzero(free)
        if left_total == 0 or idx.size == 0 or w[idx].sum() == 0:
            break
        raw = left_total * w[idx] / w[idx].sum()
        base = np.floor(raw + 1e-9).astype(np.int64)
        rem = raw - base
        left = int(left_total - base.sum())
        if left > 0:
            # stable sort on -remainder keeps earlier periods first among equals
            order = np.argsort(-np.round(rem, 9), kind="stable")
            base[order[:left]] += 1
        over = base > cap[idx]
        if not over.any():
            out[idx] = base
            break
        pinned = idx[over]
        out[pinned] = cap[pinned]
        free[pinned] = False
        left_total -= int(cap[pinned].sum())
    return out.tolist()


def period_quotas(flh_year: int, periods: list[Period], strategy: Strategy) -> list[int]:
    """Per-period hour targets.

    A full year gives ``floor(flh/365)`` per day with one extra hour on the
    first ``flh mod 365`` days, ``flh/12`` per month (months that cannot hold
    their share are filled and the overflow is spread over the others),
    ``flh`` per year.  Partial horizons scale pro rata.
    """
    n_hours = sum(p.span for p in periods)
    total = horizon_target(flh_year, n_hours)
    if strategy is Strategy.DAILY:
        weights = [p.span / 24 for p in periods]
    else:
        weights = [p.span / _period_hours(p.key, strategy) for p in periods]
    return apportion(total, weights, [p.span for p in periods])


# -- scheduling ---------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleTarget:
    flh_year: int
    strategy: Strategy = Strategy.YEARLY
    theta: float = 45.0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        _check_theta(self.theta)
        if not 0 < int(self.flh_year) <= 8760:
            raise CapacityError(f"flh_year must be in 1..8760, got {self.flh_year}")


@dataclass(frozen=True)
class ScheduleConfig:
    """Reference windows and clock settings for :func:`schedule`.

    ``reference_mode="self"`` calibrates each period on its own data, which
    reproduces perfect-foresight (historical) scheduling.
    """

    daily_reference_days: int = 7
    monthly_reference_days: int = 365
    yearly_reference_days: int = 365
    market_utc_offset_hours: int = 0
    issue_hour: int = 12
    raw_units: bool = False
    reference_mode: str = "trailing"

    def __post_init__(self):
        if self.reference_mode not in ("trailing", "self"):
            raise ValidationError(f"reference_mode must be 'trailing' or 'self', got {self.reference_mode!r}")


@dataclass(frozen=True)
class LedgerEntry:
    period: str
    target: int
    available: int
    selected_by_line: int
    capped: int
    filled_by_adjustment: int


@dataclass(frozen=True)
class AuditEntry:
    hour: int
    timestamp: str
    period: str
    rule: str


@dataclass(eq=False)
class SchedulePlan:
    """Selected hours over the forecast horizon.

    ``hours`` are indices into the horizon's ``PairedPoints`` index space;
    ``rules`` and ``scores`` are aligned with the horizon points.
    """

    target: ScheduleTarget
    start: datetime
    points: PairedPoints
    selected: np.ndarray
    rules: list
    scores: np.ndarray
    ledger: list[LedgerEntry] = field(default_factory=list)
    audit: list[AuditEntry] = field(default_factory=list)

    @property
    def hours(self) -> np.ndarray:
        return self.points.index[self.selected]

    def __len__(self) -> int:
        return int(self.selected.size)

    @property
    def total_target(self) -> int:
        return sum(e.target for e in self.ledger)

    def daily_counts(self, offset_hours: int = 0) -> dict[str, int]:
        counts: dict[str, int] = {}
        for h in absolute_hours(self.points)[self.selected].tolist():
            key = period_key(h, Strategy.DAILY, offset_hours)
            counts[key] = counts.get(key, 0) + 1
        return counts


def _safe_frame(reference: PairedPoints, candidates: PairedPoints, raw: bool) -> NormalizationFrame:
    if raw:
        return NormalizationFrame.identity()
    for pts in (reference, None):
        try:
            if pts is None:
                price = np.concatenate([reference.price, candidates.price])
                inten = np.concatenate([reference.intensity, candidates.intensity])
                return NormalizationFrame(float(price.min()), float(price.max()),
                                          float(inten.min()), float(inten.max()))
            return NormalizationFrame.from_points(pts)
        except (FrameError, ValueError):
            continue
    # constant data: any frame orders the points identically
    p0 = float(np.concatenate([reference.price, candidates.price]).min())
    c0 = float(np.concatenate([reference.intensity, candidates.intensity]).min())
    return NormalizationFrame(p0, p0 + 1.0, c0, c0 + 1.0)


def _window(points: PairedPoints, abs_h: np.ndarray, lo: int, hi: int) -> PairedPoints:
    """Points with absolute hour in [lo, hi)."""
    a, b = np.searchsorted(abs_h, [lo, hi])
    return points[a:b]


def _reference_for(day_first: int, period: Period, strategy: Strategy, history: PairedPoints,
                   hist_abs: np.ndarray, cfg: ScheduleConfig) -> PairedPoints:
    issue = day_first - (24 - cfg.issue_hour)
    days = {Strategy.DAILY: cfg.daily_reference_days, Strategy.MONTHLY: cfg.monthly_reference_days,
            Strategy.YEARLY: cfg.yearly_reference_days}[strategy]
    ref = _window(history, hist_abs, issue - 24 * days, issue)
    if strategy is Strategy.MONTHLY and len(ref):
        month = period.key[5:7]
        ref_abs = absolute_hours(ref)
        months = np.array([period_key(h, Strategy.MONTHLY, cfg.market_utc_offset_hours)[5:7] for h in ref_abs.tolist()])
        same = np.flatnonzero(months == month)
        if same.size >= 2:
            ref = ref.take(same)
    return ref


def schedule(target: ScheduleTarget, history: PairedPoints | None, forecasts: PairedPoints,
             config: ScheduleConfig = ScheduleConfig()) -> SchedulePlan:
    """Pick hours from ``forecasts`` to meet the FLH target under the chosen strategy.

    Each delivery day calibrates a trade-off line on a reference window of
    ``history`` (only hours before that day's market issue time), then takes
    the forecast hours on or below it.  Daily periods are capped or topped
    up with the hours nearest to the line; monthly and yearly periods stop
    adding once their quota is met and cover any shortfall with the last
    free hours of the period.
    """
    strategy = target.strategy
    off = config.market_utc_offset_hours
    if len(forecasts) == 0:
        raise CapacityError("no forecast hours to schedule")
    f_abs = absolute_hours(forecasts)
    if config.reference_mode == "trailing":
        if history is None or len(history) == 0:
            raise ValidationError("trailing reference mode needs history")
        h_abs = absolute_hours(history)
        if np.any(np.diff(h_abs) <= 0):
            raise ValidationError("history must be in strictly increasing time order")
    else:
        h_abs = None

    periods = horizon_periods(int(f_abs[0]), int(f_abs[-1]), strategy, off)
    quotas = period_quotas(target.flh_year, periods, strategy)
    days = horizon_periods(int(f_abs[0]), int(f_abs[-1]), Strategy.DAILY, off)

    n = len(forecasts)
    selected = np.zeros(n, dtype=bool)
    rules: list = [None] * n
    scores = np.full(n, np.nan)
    ledger: list[LedgerEntry] = []
    audit: list[AuditEntry] = []

    def stamp(pos):
        return (forecasts.start + int(forecasts.index[pos]) * HOUR).isoformat()

    day_iter = iter(days)
    pending_day = next(day_iter, None)
    for period, quota in zip(periods, quotas):
        a, b = np.searchsorted(f_abs, [period.first_hour, period.last_hour + 1])
        available = int(b - a)
        if quota > available:
            raise CapacityError(
                f"period {period.key} needs {quota} hours but only {available} forecast hours exist")
        period_pts = forecasts[a:b]
        self_line = None
        if config.reference_mode == "self" and available:
            frame = _safe_frame(period_pts, period_pts, config.raw_units)
            self_line = calibrate_line(period_pts, target.theta, quota, frame)

        count = by_line = capped = 0
        while pending_day is not None and pending_day.first_hour <= period.last_hour:
            day = pending_day
            pending_day = next(day_iter, None)
            da, db = np.searchsorted(f_abs, [day.first_hour, day.last_hour + 1])
            if db == da:
                continue
            cands = forecasts[da:db]
            if self_line is not None:
                line = self_line
            else:
                ref = _reference_for(day.first_hour, period, strategy, history, h_abs, config)
                if len(ref) == 0:
                    raise ValidationError(f"no history before delivery day {day.key} to calibrate on")
                frame = _safe_frame(ref, cands, config.raw_units)
                k_ref = int(math.floor(len(ref) * quota / available + 0.5))
                line = calibrate_line(ref, target.theta, k_ref, frame)
            s = line.scores(cands)
            scores[da:db] = s
            below = np.flatnonzero(s <= line.intercept)

            if strategy is Strategy.DAILY:
                order = rank_order(s, cands.price, cands.index)
                surplus = max(0, below.size - quota)
                if surplus:
                    below = np.sort(order[:quota])
                for p in below:
                    selected[da + p] = True
                    rules[da + p] = Rule.BELOW_LINE
                missing = quota - below.size
                for p in order:
                    if missing == 0:
                        break
                    if not selected[da + p]:
                        selected[da + p] = True
                        rules[da + p] = Rule.NEAREST_TO_LINE
                        audit.append(AuditEntry(int(cands.index[p]), stamp(da + p), period.key,
                                                Rule.NEAREST_TO_LINE.value))
                        missing -= 1
                ledger.append(LedgerEntry(period.key, quota, available, int(below.size), surplus,
                                          int(quota - below.size)))
                continue

            for p in below:  # time order
                if count >= quota:
                    capped += 1
                    continue
                selected[da + p] = True
                rules[da + p] = Rule.BELOW_LINE
                count += 1
                by_line += 1

        if strategy is Strategy.DAILY:
            continue
        deficit = quota - count
        filled = 0
        pos = b - 1
        while deficit > 0 and pos >= a:
            if not selected[pos]:
                selected[pos] = True
                rules[pos] = Rule.END_OF_PERIOD_BLOCK
                audit.append(AuditEntry(int(forecasts.index[pos]), stamp(pos), period.key,
                                        Rule.END_OF_PERIOD_BLOCK.value))
                deficit -= 1
                filled += 1
            pos -= 1
        ledger.append(LedgerEntry(period.key, quota, available, by_line, capped, filled))

    sel = np.flatnonzero(selected)
    return SchedulePlan(target, forecasts.start, forecasts, sel, [r.value if r else "" for r in rules],
                        scores, ledger, audit)
