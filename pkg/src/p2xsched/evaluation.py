"""Cost/emission analyses of hour selections.

Best case: mean of a parameter over its own optimal selection.  Compromised
case: mean of the other parameter over that same selection.  Trade-off case:
means over the selection at angle ``theta``.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CoverageError, DegenerateInputError, P2XError, ValidationError
from .scheduler import (
    EPOCH,
    SchedulePlan,
    Strategy,
    absolute_hours,
    horizon_periods,
    k_lowest_positions,
    period_quotas,
)
from .series import HOUR, HourlySeries, NormalizationFrame, PairedPoints
from .stats import OlsFit, ols_fit, pearson_correlation

PRICE_ANGLE = 90.0
INTENSITY_ANGLE = 0.0


class Case(str, enum.Enum):
    BEST = "best"
    COMPROMISED = "compromised"
    TRADEOFF = "tradeoff"


class Parameter(str, enum.Enum):
    PRICE = "price"
    INTENSITY = "intensity"


def _pure_angle(parameter: Parameter) -> float:
    return PRICE_ANGLE if parameter is Parameter.PRICE else INTENSITY_ANGLE


def _other(parameter: Parameter) -> Parameter:
    return Parameter.INTENSITY if parameter is Parameter.PRICE else Parameter.PRICE


def case_angle(case, parameter, theta: float = 45.0) -> float:
    case, parameter = Case(case), Parameter(parameter)
    if case is Case.BEST:
        return _pure_angle(parameter)
    if case is Case.COMPROMISED:
        return _pure_angle(_other(parameter))
    return float(theta)


def _values(points: PairedPoints, parameter: Parameter) -> np.ndarray:
    return points.price if parameter is Parameter.PRICE else points.intensity


@dataclass(frozen=True)
class CaseMeans:
    best_price: float
    best_intensity: float
    compromised_price: float
    compromised_intensity: float
    tradeoff_price: float
    tradeoff_intensity: float

    def as_dict(self) -> dict:
        return asdict(self)


def _mean_at(points: PairedPoints, positions: np.ndarray, parameter: Parameter) -> float:
    return float(_values(points, parameter)[np.sort(positions)].mean())


def case_means(points: PairedPoints, k: int, theta: float = 45.0,
               frame: NormalizationFrame | None = None) -> CaseMeans:
    """Six per-hour means for one global selection of ``k`` hours.

    ``compromised_price`` is the mean price over the intensity-optimal hours
    and ``compromised_intensity`` the mean intensity over the price-optimal
    hours.
    """
    by_price = k_lowest_positions(points, PRICE_ANGLE, k, frame)
    by_intensity = k_lowest_positions(points, INTENSITY_ANGLE, k, frame)
    by_theta = k_lowest_positions(points, theta, k, frame)
    return CaseMeans(
        best_price=_mean_at(points, by_price, Parameter.PRICE),
        best_intensity=_mean_at(points, by_intensity, Parameter.INTENSITY),
        compromised_price=_mean_at(points, by_intensity, Parameter.PRICE),
        compromised_intensity=_mean_at(points, by_price, Parameter.INTENSITY),
        tradeoff_price=_mean_at(points, by_theta, Parameter.PRICE),
        tradeoff_intensity=_mean_at(points, by_theta, Parameter.INTENSITY),
    )


def select_per_period(points: PairedPoints, strategy, flh_year: int, theta: float,
                      raw_units: bool = False, offset_hours: int = 0) -> np.ndarray:
    """Exact k-lowest selection inside every period of the strategy.

    Each period gets its quota from :func:`period_quotas` and is normalized
    in its own min-max frame.  Returns sorted positions into ``points``.
    """
    strategy = Strategy(strategy)
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    abs_h = absolute_hours(points)
    periods = horizon_periods(int(abs_h[0]), int(abs_h[-1]), strategy, offset_hours)
    quotas = period_quotas(flh_year, periods, strategy)
    chosen = []
    for period, quota in zip(periods, quotas):
        a, b = np.searchsorted(abs_h, [period.first_hour, period.last_hour + 1])
        sub = points[a:b]
        if quota == 0:
            continue
        frame = NormalizationFrame.identity() if raw_units else _frame_or_none(sub)
        chosen.append(a + k_lowest_positions(sub, theta, quota, frame))
    return np.concatenate(chosen) if chosen else np.zeros(0, dtype=np.int64)


def _frame_or_none(points: PairedPoints):
    try:
        return NormalizationFrame.from_points(points)
    except P2XError:
        # a constant axis scores every hour alike along it; any frame keeps the order
        p0, c0 = float(points.price.min()), float(points.intensity.min())
        return NormalizationFrame(p0, max(float(points.price.max()), p0 + 1.0),
                                  c0, max(float(points.intensity.max()), c0 + 1.0))


@dataclass(frozen=True)
class FlhCurvePoint:
    flh: int
    strategy: str
    case: str
    parameter: str
    mean_value: float


def flh_curve(points: PairedPoints, strategy, case, parameter, flh_grid, theta: float = 45.0,
              raw_units: bool = False, offset_hours: int = 0) -> list[FlhCurvePoint]:
    """Per-hour mean of ``parameter`` against the FLH target.

    Periods are pooled hour-weighted: the mean runs over the union of all
    hours selected in all periods.
    """
    strategy, case, parameter = Strategy(strategy), Case(case), Parameter(parameter)
    angle = case_angle(case, parameter, theta)
    out = []
    for flh in flh_grid:
        if not 0 < int(flh) <= 8760:
            raise ValidationError(f"FLH grid values must be in 1..8760, got {flh}")
        pos = select_per_period(points, strategy, int(flh), angle, raw_units, offset_hours)
        out.append(FlhCurvePoint(int(flh), strategy.value, case.value, parameter.value,
                                 _mean_at(points, pos, parameter)))
    return out


def improvement_pct(best: float, compromised: float, tradeoff: float) -> float:
    """Signed percentage by which the trade-off case beats the compromised case."""
    if compromised == 0:
        raise DegenerateInputError("improvement is undefined for a zero compromised mean")
    return 100.0 * (compromised - tradeoff) / compromised


@dataclass(frozen=True)
class ImprovementRow:
    area: str
    flh: int
    strategy: str
    parameter: str
    best: float
    compromised: float
    tradeoff: float
    improvement_pct: float


def improvement_rows(points: PairedPoints, flh_grid, strategies, theta: float = 45.0, area: str = "",
                     raw_units: bool = False, offset_hours: int = 0) -> list[ImprovementRow]:
    """Best/compromised/trade-off means and improvement for every (flh, strategy, parameter)."""
    rows = []
    for flh in flh_grid:
        for strategy in strategies:
            strategy = Strategy(strategy)
            sel = {angle: select_per_period(points, strategy, int(flh), angle, raw_units, offset_hours)
                   for angle in (PRICE_ANGLE, INTENSITY_ANGLE, float(theta))}
            for parameter in (Parameter.INTENSITY, Parameter.PRICE):
                best = _mean_at(points, sel[_pure_angle(parameter)], parameter)
                comp = _mean_at(points, sel[_pure_angle(_other(parameter))], parameter)
                trade = _mean_at(points, sel[float(theta)], parameter)
                rows.append(ImprovementRow(area or points.area_code, int(flh), strategy.value, parameter.value,
                                           best, comp, trade, improvement_pct(best, comp, trade)))
    return rows


@dataclass(frozen=True)
class RatioRow:
    duration: int
    parameter: str
    case: str
    scheduled_mean: float
    random_mean: float
    ratio: float


def _full_days(points: PairedPoints, offset_hours: int) -> list[np.ndarray]:
    abs_h = absolute_hours(points)
    days = horizon_periods(int(abs_h[0]), int(abs_h[-1]), Strategy.DAILY, offset_hours)
    out = []
    dropped = []
    for day in days:
        a, b = np.searchsorted(abs_h, [day.first_hour, day.last_hour + 1])
        if b - a == 24:
            out.append(np.arange(a, b))
        else:
            dropped.append(day.key)
    if dropped:
        warnings.warn(f"dropped {len(dropped)} incomplete day(s): {', '.join(dropped[:5])}"
                      + ("..." if len(dropped) > 5 else ""), stacklevel=3)
    return out


def random_baseline_ratio(points: PairedPoints, durations=range(1, 25), parameter="price", case="best",
                          theta: float = 45.0, offset_hours: int = 0) -> list[RatioRow]:
    """Scheduled-vs-random per-hour means for consuming ``d`` hours every day.

    The random baseline is the day's 24-hour mean, i.e. the expectation over
    a uniformly random choice of ``d`` hours.  Daily means are averaged over
    the year and the ratio is taken on those annual means.
    """
    parameter, case = Parameter(parameter), Case(case)
    angle = case_angle(case, parameter, theta)
    vals = _values(points, parameter)
    days = _full_days(points, offset_hours)
    if not days:
        raise CoverageError("no complete 24-hour delivery day in the data")
    random_daily = np.array([vals[d].mean() for d in days])
    random_mean = float(random_daily.mean())
    rows = []
    for dur in durations:
        dur = int(dur)
        if not 1 <= dur <= 24:
            raise ValidationError(f"duration must be in 1..24, got {dur}")
        sched_daily = np.empty(len(days))
        for i, d in enumerate(days):
            sub = points[d[0]:d[-1] + 1]
            pos = k_lowest_positions(sub, angle, dur, _frame_or_none(sub))
            sched_daily[i] = vals[d[0] + np.sort(pos)].mean()
        sched_mean = float(sched_daily.mean())
        if random_mean == 0:
            raise DegenerateInputError("random-baseline mean is zero; ratio undefined")
        rows.append(RatioRow(dur, parameter.value, case.value, sched_mean, random_mean, sched_mean / random_mean))
    return rows


@dataclass(frozen=True)
class AnglePoint:
    strategy: str
    flh: int
    angle: float
    mean_price: float
    mean_intensity: float


def angle_sweep(points: PairedPoints, flh: int, strategy, angles=(0, 15, 30, 45, 60, 75, 90),
                raw_units: bool = False, offset_hours: int = 0) -> list[AnglePoint]:
    strategy = Strategy(strategy)
    out = []
    for angle in angles:
        pos = select_per_period(points, strategy, flh, float(angle), raw_units, offset_hours)
        out.append(AnglePoint(strategy.value, int(flh), float(angle), _mean_at(points, pos, Parameter.PRICE),
                              _mean_at(points, pos, Parameter.INTENSITY)))
    return out


def midpoint_deltas(points: PairedPoints, flh: int, theta: float = 45.0, raw_units: bool = False,
                    offset_hours: int = 0) -> dict:
    """Percentage decrease of the ``theta`` means from daily to monthly and to yearly scheduling."""
    mid = {s: angle_sweep(points, flh, s, (theta,), raw_units, offset_hours)[0] for s in Strategy}
    base = mid[Strategy.DAILY]
    if base.mean_price == 0 or base.mean_intensity == 0:
        raise DegenerateInputError("daily mean is zero; percentage decrease undefined")
    out = {}
    for s in (Strategy.MONTHLY, Strategy.YEARLY):
        out[f"daily_to_{s.value}"] = {
            "price_decrease_pct": 100.0 * (base.mean_price - mid[s].mean_price) / base.mean_price,
            "intensity_decrease_pct": 100.0 * (base.mean_intensity - mid[s].mean_intensity) / base.mean_intensity,
        }
    return out


@dataclass(frozen=True)
class AreaStudyRow:
    area: str
    correlation: float
    improvement_pct: float


def correlation_improvement_study(areas: dict, flh: int = 6000, theta: float = 45.0,
                                  raw_units: bool = False) -> tuple[list[AreaStudyRow], OlsFit]:
    """Per-area price/intensity correlation against yearly intensity improvement, plus their OLS fit."""
    rows = []
    for name, points in areas.items():
        try:
            corr = pearson_correlation(points.price, points.intensity)
            imp = [r for r in improvement_rows(points, [flh], [Strategy.YEARLY], theta, name, raw_units)
                   if r.parameter == Parameter.INTENSITY.value][0]
            rows.append(AreaStudyRow(name, corr, imp.improvement_pct))
        except (DegenerateInputError, P2XError) as exc:
            warnings.warn(f"area {name} skipped: {exc}", stacklevel=2)
    if len(rows) < 3:
        raise ValidationError(f"correlation study needs at least 3 usable areas, got {len(rows)}")
    fit = ols_fit([r.correlation for r in rows], [r.improvement_pct for r in rows])
    return rows, fit


@dataclass(frozen=True, eq=False)
class Alignment:
    days: list
    generation: np.ndarray
    scheduled_hours: np.ndarray
    correlation: float


def generation_alignment(generation: HourlySeries, plan: SchedulePlan, offset_hours: int = 0) -> Alignment:
    """Daily generation totals against daily scheduled-hour counts."""
    abs_h = absolute_hours(plan.points)
    days = horizon_periods(int(abs_h[0]), int(abs_h[-1]), Strategy.DAILY, offset_hours)
    counts = plan.daily_counts(offset_hours)
    gen_first = (generation.start - EPOCH) // HOUR
    sums, cnt, keys = [], [], []
    for day in days:
        lo = day.first_hour - gen_first
        hi = day.last_hour - gen_first + 1
        if lo < 0 or hi > len(generation):
            raise CoverageError(f"generation series does not cover day {day.key}")
        chunk = generation.values[lo:hi]
        if np.isnan(chunk).any():
            raise CoverageError(f"generation series has missing hours on {day.key}")
        keys.append(day.key)
        sums.append(float(chunk.sum()))
        cnt.append(counts.get(day.key, 0))
    sums_a, cnt_a = np.array(sums), np.array(cnt, dtype=np.float64)
    if np.all(cnt_a == cnt_a[0]):
        raise DegenerateInputError(
            "scheduled hours per day are constant; alignment is not applicable for daily strategy")
    return Alignment(keys, sums_a, cnt_a, pearson_correlation(sums_a, cnt_a))
