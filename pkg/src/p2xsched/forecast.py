"""Decomposition forecasting ("trend + seasonal + random", each forecast separately).

The series is split with a centered moving average into trend, an m-periodic
seasonal profile and a random remainder.  Trend and random are forecast with
difference-then-AR models fitted by conditional least squares, the seasonal
part by repeating its last period (or any plug-in forecaster), and the three
forecasts are summed.
"""
from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time, timedelta, timezone
from typing import Any, Protocol, runtime_checkable

import numpy as np

from . import kernels
from .errors import (
    DegenerateFitError,
    EmptyOverlapError,
    LengthError,
    RangeError,
    StateError,
    ValidationError,
)
from .series import HOUR, HourlySeries
from .stats import OlsFit, SummaryStats, ols_fit, pearson_correlation, summary_stats

log = logging.getLogger(__name__)


class EdgePolicy(str, enum.Enum):
    LINEAR_EXTENSION = "linear_extension"


@dataclass(frozen=True, eq=False)
class Decomposition:
    period: int
    trend: np.ndarray
    seasonal: np.ndarray
    random: np.ndarray
    edge_policy: EdgePolicy
    head_filled: int
    tail_filled: int

    @property
    def profile(self) -> np.ndarray:
        """One period of the seasonal component, phase 0 at the series start."""
        return self.seasonal[: self.period]

    @property
    def interior(self) -> slice:
        return slice(self.head_filled, self.trend.size - self.tail_filled)


def _values(series) -> np.ndarray:
    if isinstance(series, HourlySeries):
        return series.values
    return np.asarray(series, dtype=np.float64)


def centered_moving_average(values, m: int = 24) -> np.ndarray:
    """2xm centered average for even ``m`` (plain m-window for odd); edges are NaN."""
    x = _values(values)
    if m < 1:
        raise ValidationError("period must be positive")
    if x.size < m + 1:
        raise LengthError(f"centered moving average needs at least {m + 1} values, got {x.size}")
    return kernels.centered_moving_average(x, m)


def decompose(series, m: int = 24) -> Decomposition:
    x = _values(series)
    if x.size < 3 * m:
        raise LengthError(f"decomposition needs at least {3 * m} hours, got {x.size}")
    if np.isnan(x).any():
        raise ValidationError("decomposition input has missing values; repair the series first")
    trend = centered_moving_average(x, m)
    defined = np.flatnonzero(~np.isnan(trend))
    lo, hi = int(defined[0]), int(defined[-1])
    detrended = x - trend
    profile = kernels.seasonal_profile(detrended, m, 0)
    profile = profile - profile.mean()
    seasonal = np.resize(profile, x.size)

    head_slope = trend[lo + 1] - trend[lo]
    tail_slope = trend[hi] - trend[hi - 1]
    trend[:lo] = trend[lo] - head_slope * np.arange(lo, 0, -1)
    trend[hi + 1:] = trend[hi] + tail_slope * np.arange(1, x.size - hi)
    random = x - trend - seasonal
    for arr in (trend, seasonal, random):
        arr.setflags(write=False)
    return Decomposition(m, trend, seasonal, random, EdgePolicy.LINEAR_EXTENSION, lo, x.size - 1 - hi)


# -- component forecasters ---------------------------------------------------

def _difference(z: np.ndarray, d: int) -> tuple[np.ndarray, tuple[float, ...]]:
    """Difference ``d`` times; also return the last value of each level for re-integration."""
    tails = []
    for _ in range(d):
        tails.append(float(z[-1]))
        z = np.diff(z)
    return z, tuple(tails)


def _integrate(z: np.ndarray, tails: tuple[float, ...]) -> np.ndarray:
    for last in reversed(tails):
        z = last + np.cumsum(z)
    return z


@dataclass(frozen=True, eq=False)
class ArForecaster:
    """ARIMA(p, d, q) by conditional least squares on the d-differenced series.

    With ``q > 0`` the innovations are estimated from a long AR pre-fit
    (Hannan-Rissanen) and entered as extra regressors.
    """

    p: int = 24
    d: int = 1
    q: int = 0
    coef: np.ndarray | None = None
    ma_coef: np.ndarray | None = None
    intercept: float = 0.0
    history: np.ndarray | None = None
    residuals: np.ndarray | None = None
    tails: tuple[float, ...] = ()

    kind = "autoregressive"

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError("autoregressive forecaster needs p >= 1")
        if self.d < 0 or self.q < 0:
            raise ValidationError("d and q must be non-negative")

    @property
    def fitted(self) -> bool:
        return self.coef is not None

    def min_length(self) -> int:
        return 3 * (self.p + self.q + self.d + 1)

    def fit(self, values) -> "ArForecaster":
        x = np.asarray(values, dtype=np.float64)
        if x.size < self.min_length():
            raise LengthError(f"AR({self.p},{self.d},{self.q}) needs {self.min_length()} values, got {x.size}")
        z, tails = _difference(x, self.d)
        if self.q == 0:
            X = kernels.lag_matrix(z, self.p)
            y = z[self.p:]
            beta = _lstsq(X, y)
            return replace(self, coef=beta[1:], ma_coef=np.zeros(0), intercept=float(beta[0]),
                           history=z[-self.p:].copy(), residuals=np.zeros(0), tails=tails)
        long_p = min(max(2 * (self.p + self.q), 10), z.size // 3)
        Xl = kernels.lag_matrix(z, long_p)
        bl = _lstsq(Xl, z[long_p:])
        e = np.zeros(z.size)
        e[long_p:] = z[long_p:] - Xl @ bl
        start = long_p + self.q
        X = kernels.lag_matrix(z, self.p)[start - self.p:]
        E = kernels.lag_matrix(e, self.q)[start - self.q:, 1:]
        y = z[start:]
        beta = _lstsq(np.hstack([X, E]), y)
        resid = np.zeros(z.size)
        resid[start:] = y - np.hstack([X, E]) @ beta
        return replace(self, coef=beta[1:self.p + 1], ma_coef=beta[self.p + 1:], intercept=float(beta[0]),
                       history=z[-self.p:].copy(), residuals=resid[-self.q:].copy(), tails=tails)

    def refresh(self, values) -> "ArForecaster":
        """Keep the fitted coefficients, re-anchor on new data."""
        if not self.fitted:
            raise StateError("refresh() needs a fitted forecaster")
        z, tails = _difference(np.asarray(values, dtype=np.float64), self.d)
        if z.size < self.p:
            raise LengthError("not enough values to re-anchor the AR state")
        resid = np.zeros(self.q)
        return replace(self, history=z[-self.p:].copy(), residuals=resid, tails=tails)

    def predict(self, horizon: int) -> np.ndarray:
        if not self.fitted:
            raise StateError("forecaster has not been fitted")
        if not self.q:
            z = kernels.ar_predict(self.coef, self.intercept, self.history, horizon)
        else:
            zs = list(self.history)
            es = list(self.residuals) + [0.0] * horizon
            for h in range(horizon):
                acc = self.intercept
                acc += sum(self.coef[j] * zs[-1 - j] for j in range(self.p))
                acc += sum(self.ma_coef[j] * es[self.q + h - 1 - j] for j in range(self.q))
                zs.append(acc)
            z = np.array(zs[self.p:])
        return _integrate(z, self.tails)


def _lstsq(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    beta, _, rank, sv = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1] or sv[-1] <= sv[0] * 1e-10:
        raise DegenerateFitError(f"design matrix is rank deficient (rank {rank} of {X.shape[1]})")
    return beta


@dataclass(frozen=True, eq=False)
class SeasonalRepeat:
    """Tile the last observed period forward."""

    m: int = 24
    last_period: np.ndarray | None = None

    kind = "seasonal_repeat"

    @property
    def fitted(self) -> bool:
        return self.last_period is not None

    def fit(self, values) -> "SeasonalRepeat":
        x = np.asarray(values, dtype=np.float64)
        if x.size < self.m:
            raise LengthError(f"seasonal repeat needs {self.m} values, got {x.size}")
        return replace(self, last_period=x[-self.m:].copy())

    def refresh(self, values) -> "SeasonalRepeat":
        return self.fit(values)

    def predict(self, horizon: int) -> np.ndarray:
        if not self.fitted:
            raise StateError("forecaster has not been fitted")
        return np.resize(self.last_period, horizon)


@dataclass(frozen=True, eq=False)
class ConstantForecaster:
    """Mean of the d-differenced series, re-integrated (drift for d >= 1)."""

    d: int = 0
    level: float | None = None
    tails: tuple[float, ...] = ()

    kind = "constant"

    @property
    def fitted(self) -> bool:
        return self.level is not None

    def fit(self, values) -> "ConstantForecaster":
        z, tails = _difference(np.asarray(values, dtype=np.float64), self.d)
        if z.size == 0:
            raise LengthError("constant forecaster needs more than d values")
        return replace(self, level=float(z.mean()), tails=tails)

    refresh = fit

    def predict(self, horizon: int) -> np.ndarray:
        if not self.fitted:
            raise StateError("forecaster has not been fitted")
        return _integrate(np.full(horizon, self.level), self.tails)


@runtime_checkable
class PluginForecaster(Protocol):
    """Any forecaster with this fit/predict contract can fill a component slot.

    ``fit`` must return a fitted object and must be deterministic for a
    given ``seed``.
    """

    def fit(self, values, seed: int | None = None) -> Any: ...

    def predict(self, horizon: int) -> np.ndarray: ...


def fit_component(values, f, seed: int | None = None):
    """Return a fitted copy of ``f``; the input forecaster is left untouched."""
    if isinstance(f, (ArForecaster, SeasonalRepeat, ConstantForecaster)):
        return f.fit(values)
    return f.fit(values, seed=seed)


def predict_component(f, horizon: int) -> np.ndarray:
    if horizon < 1:
        raise ValidationError("horizon must be positive")
    if not getattr(f, "fitted", True):
        raise StateError("forecaster has not been fitted")
    out = np.asarray(f.predict(horizon), dtype=np.float64)
    if out.shape != (horizon,):
        raise ValidationError(f"forecaster returned shape {out.shape}, expected ({horizon},)")
    return out


# -- Method 1 -----------------------------------------------------------------

@dataclass(frozen=True)
class ForecastConfig:
    period: int = 24
    horizon: int = 36
    training_window: int = 2160
    trend_order: tuple[int, int, int] = (24, 1, 0)
    random_order: tuple[int, int, int] = (24, 0, 0)
    seasonal_plugin: Any = None
    seed: int = 0
    reuse_fit: bool = False
    issue_hour: int = 12
    market_utc_offset_hours: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.horizon < 1 or self.training_window < 1 or self.period < 1:
            raise ValidationError("horizon, training_window and period must be positive")
        if not 0 <= self.issue_hour <= 23:
            raise ValidationError("issue_hour must be in 0..23")


@dataclass(frozen=True, eq=False)
class ForecastResult:
    origin: datetime
    horizon: int
    trend: np.ndarray
    seasonal: np.ndarray
    random: np.ndarray
    forecast: np.ndarray
    training_window: int
    diagnostics: dict = field(default_factory=dict)

    def timestamps(self) -> list[datetime]:
        return [self.origin + (h + 1) * HOUR for h in range(self.horizon)]


@dataclass(frozen=True)
class _Models:
    trend: Any
    seasonal: Any
    random: Any


def _fit_or_fallback(values, order, name, diag):
    p, d, q = order
    try:
        f = ArForecaster(p, d, q).fit(values)
        diag[name] = f"arima({p},{d},{q})"
    except DegenerateFitError:
        f = ConstantForecaster(d).fit(values)
        diag[name] = f"constant(d={d})"
    return f


def _fit_models(dec: Decomposition, cfg: ForecastConfig, diag: dict) -> _Models:
    trend = _fit_or_fallback(dec.trend, cfg.trend_order, "trend_model", diag)
    random = _fit_or_fallback(dec.random, cfg.random_order, "random_model", diag)
    if cfg.seasonal_plugin is None:
        seasonal = SeasonalRepeat(cfg.period).fit(dec.seasonal)
        diag["seasonal_model"] = "seasonal_repeat"
    else:
        seasonal = fit_component(dec.seasonal, cfg.seasonal_plugin, seed=cfg.seed)
        diag["seasonal_model"] = type(cfg.seasonal_plugin).__name__
    return _Models(trend, seasonal, random)


def _refresh_models(models: _Models, dec: Decomposition, cfg: ForecastConfig, diag: dict) -> _Models:
    def refresh(f, values):
        if hasattr(f, "refresh"):
            return f.refresh(values)
        return fit_component(values, f, seed=cfg.seed)
    diag.update(trend_model="reused", random_model="reused", seasonal_model="reused")
    return _Models(refresh(models.trend, dec.trend), refresh(models.seasonal, dec.seasonal),
                   refresh(models.random, dec.random))


def _training_values(series, cfg: ForecastConfig) -> np.ndarray:
    x = _values(series)
    if x.size > cfg.training_window:
        x = x[-cfg.training_window:]
    return x


def method1_forecast(series: HourlySeries, horizon: int | None = None,
                     config: ForecastConfig = ForecastConfig(), models: _Models | None = None) -> ForecastResult:
    """Forecast ``horizon`` hours after the last value of ``series``.

    Only the trailing ``config.training_window`` hours are used.  Passing
    ``models`` re-anchors previously fitted component models instead of
    refitting.
    """
    horizon = config.horizon if horizon is None else horizon
    x = _training_values(series, config)
    dec = decompose(x, config.period)
    diag: dict = {}
    if models is None:
        models = _fit_models(dec, config, diag)
    else:
        models = _refresh_models(models, dec, config, diag)
    t = predict_component(models.trend, horizon)
    s = predict_component(models.seasonal, horizon)
    r = predict_component(models.random, horizon)
    origin = series.end if isinstance(series, HourlySeries) else None
    diag["fitted"] = models
    return ForecastResult(origin, horizon, t, s, r, t + s + r, int(x.size), diag)


def delivery_day_start(day: date, cfg: ForecastConfig) -> datetime:
    """UTC timestamp of local midnight starting ``day``."""
    local = datetime.combine(day, time(0), tzinfo=timezone(timedelta(hours=cfg.market_utc_offset_hours)))
    return local.astimezone(timezone.utc)


def forecast_origin(day: date, cfg: ForecastConfig) -> datetime:
    """Last training hour for delivery ``day``: the hour before the issue time on the previous day."""
    return delivery_day_start(day, cfg) - timedelta(hours=24 - cfg.issue_hour) - HOUR


def _local_days(first: datetime, last: datetime, cfg: ForecastConfig) -> list[date]:
    off = timedelta(hours=cfg.market_utc_offset_hours)
    d0 = (first + off).date()
    if (first + off).time() != time(0):
        d0 += timedelta(days=1)
    d1 = (last + off - timedelta(hours=23)).date()
    return [d0 + timedelta(days=i) for i in range((d1 - d0).days + 1)]


def _forecast_day(series: HourlySeries, day: date, cfg: ForecastConfig, models=None):
    origin = forecast_origin(day, cfg)
    o = series.offset_of(origin)
    lo = o - cfg.training_window + 1
    if lo < 0:
        raise RangeError(
            f"delivery day {day} needs history from {(origin - (cfg.training_window - 1) * HOUR).isoformat()}, "
            f"series starts {series.start.isoformat()}")
    train = HourlySeries(series.area_code, series.quantity, series.unit, series.timestamp(lo),
                         series.values[lo:o + 1])
    skip = (delivery_day_start(day, cfg) - origin) // HOUR
    if skip + 23 > cfg.horizon:
        raise ValidationError(f"horizon {cfg.horizon} does not reach the end of the delivery day (needs {skip + 23})")
    res = method1_forecast(train, cfg.horizon, cfg, models)
    return res, res.forecast[skip - 1: skip + 23]


def _forecast_day_star(args):
    series, day, cfg, models = args
    res, values = _forecast_day(series, day, cfg, models)
    diag = {k: v for k, v in res.diagnostics.items() if k != "fitted"}
    return res.origin, values, diag


def rolling_day_ahead_runs(series: HourlySeries, config: ForecastConfig = ForecastConfig(),
                           first_day: date | None = None, last_day: date | None = None):
    """Run one forecast per delivery day.

    Returns ``(forecast_series, runs)`` where ``runs`` lists one dict per day
    with the origin and component diagnostics.
    """
    if first_day is None:
        earliest = series.start + (config.training_window - 1) * HOUR
        first_day = next((d for d in _local_days(series.start, series.end + 48 * HOUR, config)
                          if forecast_origin(d, config) >= earliest), None)
        if first_day is None:
            raise RangeError("series is too short for a single day-ahead forecast")
    if last_day is None:
        days = _local_days(series.start, series.end, config)
        last_day = days[-1] if days else first_day
    if last_day < first_day:
        raise RangeError(f"no delivery days between {first_day} and {last_day}")
    days = [first_day + timedelta(days=i) for i in range((last_day - first_day).days + 1)]
    for day in (days[0], days[-1]):
        o = series.offset_of(forecast_origin(day, config))
        if o - config.training_window + 1 < 0 or o >= len(series):
            raise RangeError(f"series does not cover the training window for delivery day {day}")

    models = None
    if config.reuse_fit:
        res, _ = _forecast_day(series, days[0], config)
        models = res.diagnostics["fitted"]
    jobs = [(series, d, config, models) for d in days]
    if config.workers > 1 and len(days) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_forecast_day_star, jobs, chunksize=max(1, len(days) // (4 * config.workers))))
    else:
        results = [_forecast_day_star(j) for j in jobs]
    values = np.concatenate([r[1] for r in results])
    runs = [{"delivery_day": d.isoformat(), "origin": r[0].isoformat(), **r[2]} for d, r in zip(days, results)]
    out = HourlySeries(series.area_code, series.quantity, series.unit, delivery_day_start(days[0], config), values)
    return out, runs


def rolling_day_ahead(series: HourlySeries, config: ForecastConfig = ForecastConfig(),
                      first_day: date | None = None, last_day: date | None = None) -> HourlySeries:
    """Day-ahead forecasts for every delivery day, concatenated into one series."""
    return rolling_day_ahead_runs(series, config, first_day, last_day)[0]


@dataclass(frozen=True)
class ForecastEvaluation:
    fit: OlsFit
    forecast_stats: SummaryStats
    actual_stats: SummaryStats
    correlation: float
    n: int

    def as_dict(self) -> dict:
        return {"fit": self.fit.as_dict(), "forecast_stats": self.forecast_stats.as_dict(),
                "actual_stats": self.actual_stats.as_dict(), "correlation": self.correlation, "n": self.n}


def evaluate_forecast(forecast: HourlySeries, actual: HourlySeries) -> ForecastEvaluation:
    """Regress actual on forecast over the aligned, non-missing overlap."""
    first = max(forecast.start, actual.start)
    last = min(forecast.end, actual.end)
    if last < first:
        raise EmptyOverlapError("forecast and actual series do not overlap")
    n = (last - first) // HOUR + 1
    f = forecast.values[forecast.offset_of(first):][:n]
    a = actual.values[actual.offset_of(first):][:n]
    ok = ~(np.isnan(f) | np.isnan(a))
    f, a = f[ok], a[ok]
    if f.size < 3:
        raise EmptyOverlapError(f"only {f.size} aligned non-missing hours; need at least 3")
    return ForecastEvaluation(ols_fit(f, a), summary_stats(f), summary_stats(a), pearson_correlation(f, a), int(f.size))
