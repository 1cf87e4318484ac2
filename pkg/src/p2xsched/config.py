"""Flat ``key = value`` run configuration.

Grammar: one ``key = value`` per line; ``#`` or ``;`` start a comment line;
keys are dotted (``schedule.flh_year``) and the dotted prefix acts as the
section.  Lists are comma separated; ``a-b`` inside an integer list expands
to the inclusive range.  Relative paths resolve against the config file's
directory.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .errors import ConfigError
from .forecast import ForecastConfig
from .ingest import CsvSpec, GapPolicy
from .scheduler import ScheduleConfig, ScheduleTarget, Strategy
from .series import DEFAULT_UNIT, Quantity


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{no}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{no}: duplicate key {key!r}")
        out[key] = value
    return out


def _bool(v: str, key: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {v!r}")


def _int(v: str, key: str) -> int:
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None


def _float(v: str, key: str) -> float:
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


def _int_list(v: str, key: str) -> list[int]:
    out = []
    for part in (p.strip() for p in v.split(",")):
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(_int(a, key), _int(b, key) + 1))
        else:
            out.append(_int(part, key))
    if not out:
        raise ConfigError(f"{key}: list must not be empty")
    return out


def _str_list(v: str) -> list[str]:
    return [p.strip() for p in v.split(",") if p.strip()]


def _date(v: str, key: str) -> date:
    try:
        return date.fromisoformat(v)
    except ValueError:
        raise ConfigError(f"{key}: expected YYYY-MM-DD, got {v!r}") from None


@dataclass(frozen=True)
class InputSpec:
    path: Path
    csv: CsvSpec


@dataclass(frozen=True)
class RunConfig:
    area: str
    price: InputSpec
    intensity: InputSpec
    generation: InputSpec | None
    areas: dict
    gap_policy: GapPolicy
    forecast: ForecastConfig
    target: ScheduleTarget
    schedule: ScheduleConfig
    first_day: date | None
    last_day: date | None
    eval_flh: list
    eval_strategies: list
    eval_angles: list
    eval_durations: list
    eval_theta: float
    out_dir: Path
    seed: int
    use_actuals: bool
    raw: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Resolved settings, for the run manifest."""
        return dict(sorted(self.raw.items()))


_KNOWN_PREFIXES = ("data.", "areas.", "gap.", "forecast.", "schedule.", "evaluate.", "output.")
_KNOWN_TOP = {"area", "seed", "market_utc_offset_hours", "use_actuals"}
_INPUT_FIELDS = {"path", "timestamp_column", "value_column", "timezone", "decimal_separator", "delimiter", "unit"}
_FORECAST_KEYS = {"horizon", "training_window", "period", "trend_order", "random_order", "reuse_fit",
                  "workers", "issue_hour"}
_SCHEDULE_KEYS = {"flh_year", "strategy", "theta", "first_day", "last_day", "daily_reference_days",
                  "monthly_reference_days", "yearly_reference_days", "raw_units"}
_EVALUATE_KEYS = {"flh", "strategies", "angles", "durations", "theta"}


def _check_keys(kv: dict[str, str]) -> None:
    for key in kv:
        if key in _KNOWN_TOP:
            continue
        head, _, rest = key.partition(".")
        ok = False
        if head == "data":
            kind, _, fld = rest.partition(".")
            ok = kind in ("price", "intensity", "generation") and fld in _INPUT_FIELDS
        elif head == "areas":
            name, _, kind = rest.rpartition(".")
            ok = bool(name) and kind in ("price", "intensity")
        elif head == "gap":
            ok = rest in ("mode", "max_gap_hours")
        elif head == "forecast":
            ok = rest in _FORECAST_KEYS
        elif head == "schedule":
            ok = rest in _SCHEDULE_KEYS
        elif head == "evaluate":
            ok = rest in _EVALUATE_KEYS
        elif head == "output":
            ok = rest == "dir"
        if not ok:
            raise ConfigError(f"unknown config key {key!r}")


def _order(v: str, key: str) -> tuple[int, int, int]:
    parts = _int_list(v, key)
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 'p,d,q', got {v!r}")
    return tuple(parts)  # type: ignore[return-value]


def build_config(kv: dict[str, str], base_dir: Path = Path("."), overrides: dict | None = None) -> RunConfig:
    kv = dict(kv)
    kv.update({k: str(v) for k, v in (overrides or {}).items() if v is not None})
    _check_keys(kv)
    get = kv.get
    area = get("area", "AREA")
    offset = _int(get("market_utc_offset_hours", "0"), "market_utc_offset_hours")

    def input_spec(kind: str, quantity: Quantity, required: bool) -> InputSpec | None:
        prefix = f"data.{kind}."
        path = get(prefix + "path")
        if path is None:
            if required:
                raise ConfigError(f"missing required key {prefix}path")
            return None
        try:
            spec = CsvSpec(
                area_code=area,
                quantity=quantity,
                unit=get(prefix + "unit", DEFAULT_UNIT[quantity]),
                timestamp_column=get(prefix + "timestamp_column", "timestamp"),
                value_column=get(prefix + "value_column", "value"),
                timezone=get(prefix + "timezone", "UTC"),
                decimal_separator=get(prefix + "decimal_separator", "."),
                delimiter=get(prefix + "delimiter", ","),
            )
        except Exception as exc:
            raise ConfigError(f"{prefix}*: {exc}") from None
        return InputSpec((base_dir / path).resolve() if not Path(path).is_absolute() else Path(path), spec)

    areas: dict[str, dict[str, Path]] = {}
    for key, value in kv.items():
        if key.startswith("areas."):
            name, _, kind = key[len("areas."):].rpartition(".")
            p = Path(value)
            areas.setdefault(name, {})[kind] = p if p.is_absolute() else (base_dir / p).resolve()
    for name, files in areas.items():
        if set(files) != {"price", "intensity"}:
            raise ConfigError(f"area {name!r} needs both areas.{name}.price and areas.{name}.intensity")

    try:
        gap = GapPolicy(get("gap.mode", "linear_interpolate"), _int(get("gap.max_gap_hours", "3"), "gap.max_gap_hours"))
        seed = _int(get("seed", "0"), "seed")
        fc = ForecastConfig(
            period=_int(get("forecast.period", "24"), "forecast.period"),
            horizon=_int(get("forecast.horizon", "36"), "forecast.horizon"),
            training_window=_int(get("forecast.training_window", "2160"), "forecast.training_window"),
            trend_order=_order(get("forecast.trend_order", "24,1,0"), "forecast.trend_order"),
            random_order=_order(get("forecast.random_order", "24,0,0"), "forecast.random_order"),
            seed=seed,
            reuse_fit=_bool(get("forecast.reuse_fit", "false"), "forecast.reuse_fit"),
            issue_hour=_int(get("forecast.issue_hour", "12"), "forecast.issue_hour"),
            market_utc_offset_hours=offset,
            workers=_int(get("forecast.workers", "1"), "forecast.workers"),
        )
        strategy = get("schedule.strategy", "yearly")
        if strategy not in {s.value for s in Strategy}:
            raise ConfigError(f"schedule.strategy must be daily, monthly or yearly, got {strategy!r}")
        target = ScheduleTarget(_int(get("schedule.flh_year", "6000"), "schedule.flh_year"), strategy,
                                _float(get("schedule.theta", "45"), "schedule.theta"))
        use_actuals = _bool(get("use_actuals", "false"), "use_actuals")
        sc = ScheduleConfig(
            daily_reference_days=_int(get("schedule.daily_reference_days", "7"), "schedule.daily_reference_days"),
            monthly_reference_days=_int(get("schedule.monthly_reference_days", "365"),
                                        "schedule.monthly_reference_days"),
            yearly_reference_days=_int(get("schedule.yearly_reference_days", "365"),
                                       "schedule.yearly_reference_days"),
            market_utc_offset_hours=offset,
            issue_hour=fc.issue_hour,
            raw_units=_bool(get("schedule.raw_units", "false"), "schedule.raw_units"),
            reference_mode="self" if use_actuals else "trailing",
        )
        eval_strategies = _str_list(get("evaluate.strategies", "daily,monthly,yearly"))
        for s in eval_strategies:
            Strategy(s)
        angles = [_float(a, "evaluate.angles") for a in _str_list(get("evaluate.angles", "0,15,30,45,60,75,90"))]
        if not angles or any(not 0 <= a <= 90 for a in angles):
            raise ConfigError("evaluate.angles must be a non-empty list within [0, 90]")
        durations = _int_list(get("evaluate.durations", "1-24"), "evaluate.durations")
        flh = _int_list(get("evaluate.flh", "4000,5000,6000,7000"), "evaluate.flh")
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc)) from None

    out = Path(get("output.dir", "out"))
    return RunConfig(
        area=area,
        price=input_spec("price", Quantity.PRICE, True),
        intensity=input_spec("intensity", Quantity.CO2_INTENSITY, True),
        generation=input_spec("generation", Quantity.GENERATION, False),
        areas=dict(sorted(areas.items())),
        gap_policy=gap,
        forecast=fc,
        target=target,
        schedule=sc,
        first_day=_date(get("schedule.first_day"), "schedule.first_day") if get("schedule.first_day") else None,
        last_day=_date(get("schedule.last_day"), "schedule.last_day") if get("schedule.last_day") else None,
        eval_flh=flh,
        eval_strategies=eval_strategies,
        eval_angles=angles,
        eval_durations=durations,
        eval_theta=_float(get("evaluate.theta", get("schedule.theta", "45")), "evaluate.theta"),
        out_dir=out if out.is_absolute() else (base_dir / out).resolve(),
        seed=seed,
        use_actuals=use_actuals,
        raw=kv,
    )


def load_config(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    kv = parse_config_text(path.read_text(encoding="utf-8"), str(path))
    return build_config(kv, path.resolve().parent, overrides)
