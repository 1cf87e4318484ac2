"""Command line entry point: ``p2xsched {ingest,forecast,schedule,evaluate,sweep}``.

Exit codes: 0 success, 2 invalid input/config/capacity, 3 numerically
degenerate input, 1 anything unexpected.
"""
from __future__ import annotations

import argparse
import logging
import platform
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._io import atomic_write_json, sha256_file
from .config import RunConfig, load_config
from .errors import DegenerateFitError, DegenerateInputError, P2XError, StateError, ValidationError
from .evaluation import (
    Case,
    Parameter,
    angle_sweep,
    correlation_improvement_study,
    flh_curve,
    generation_alignment,
    improvement_rows,
    midpoint_deltas,
    random_baseline_ratio,
)
from .forecast import delivery_day_start, evaluate_forecast, rolling_day_ahead_runs
from .ingest import CsvSpec, count_gaps, load_hourly_csv, repair_series, write_series_csv
from .kernels import BACKEND
from .reports import (
    ALIGNMENT_COLUMNS,
    ANGLE_COLUMNS,
    AREA_COLUMNS,
    FLH_COLUMNS,
    IMPROVEMENT_COLUMNS,
    INGEST_COLUMNS,
    RATIO_COLUMNS,
    jsonable,
    write_plan,
    write_rows,
)
from .scheduler import ScheduleConfig, ScheduleTarget, Strategy, schedule
from .series import HOUR, HourlySeries, Quantity, pair_series

log = logging.getLogger("p2xsched")


# -- pipeline steps -------------------------------------------------------------

def _load(spec, policy):
    if not spec.path.is_file():
        raise ValidationError(f"input file not found: {spec.path}")
    series, report = load_hourly_csv(spec.path, spec.csv)
    repaired = repair_series(series, policy)
    filled = count_gaps(series) - count_gaps(repaired)
    report = type(report)(**{**report.as_dict(), "path": spec.path.name, "gaps_filled": filled})
    return repaired, report


def load_inputs(cfg: RunConfig):
    price, rp = _load(cfg.price, cfg.gap_policy)
    intensity, ri = _load(cfg.intensity, cfg.gap_policy)
    reports = {"price": rp, "intensity": ri}
    generation = None
    if cfg.generation is not None:
        generation, rg = _load(cfg.generation, cfg.gap_policy)
        reports["generation"] = rg
    return price, intensity, generation, reports


def _full_days(series: HourlySeries, cfg: RunConfig) -> tuple[date, date]:
    off = timedelta(hours=cfg.forecast.market_utc_offset_hours)
    first = series.start + off
    d0 = first.date() if first.hour == 0 else first.date() + timedelta(days=1)
    last = series.end + off
    d1 = last.date() if last.hour == 23 else last.date() - timedelta(days=1)
    if d1 < d0:
        raise ValidationError("data do not contain a complete delivery day")
    return d0, d1


def horizon_days(cfg: RunConfig, price: HourlySeries, intensity: HourlySeries) -> tuple[date, date]:
    p0, p1 = _full_days(price, cfg)
    i0, i1 = _full_days(intensity, cfg)
    d0, d1 = max(p0, i0), min(p1, i1)
    return cfg.first_day or d0, cfg.last_day or d1


def actual_pairs(cfg: RunConfig, price, intensity, days=None):
    pairs = pair_series(price, intensity)
    if days is None:
        return pairs
    lo = delivery_day_start(days[0], cfg.forecast)
    hi = delivery_day_start(days[1], cfg.forecast) + 23 * HOUR
    return pair_series(price.window(lo, hi), intensity.window(lo, hi))


def run_forecasts(cfg: RunConfig, price, intensity, days):
    fp, runs_p = rolling_day_ahead_runs(price, cfg.forecast, days[0], days[1])
    fi, runs_i = rolling_day_ahead_runs(intensity, cfg.forecast, days[0], days[1])
    return fp, fi, runs_p, runs_i


def build_plan(cfg: RunConfig, price, intensity, days):
    actual = actual_pairs(cfg, price, intensity, days)
    if cfg.use_actuals:
        sc = ScheduleConfig(**{**cfg.schedule.__dict__, "reference_mode": "self"})
        return schedule(cfg.target, None, actual, sc), actual, None
    fp, fi, runs_p, runs_i = run_forecasts(cfg, price, intensity, days)
    history = pair_series(price, intensity)
    plan = schedule(cfg.target, history, pair_series(fp, fi), cfg.schedule)
    return plan, actual, {"price": runs_p, "intensity": runs_i}


# -- manifest -------------------------------------------------------------------

def _manifest(cfg: RunConfig, command: str, outputs: list[Path]) -> Path:
    inputs = {}
    for name, spec in (("price", cfg.price), ("intensity", cfg.intensity), ("generation", cfg.generation)):
        if spec is not None and spec.path.is_file():
            inputs[name] = {"file": spec.path.name, "sha256": sha256_file(spec.path)}
    for area, files in cfg.areas.items():
        for kind, path in files.items():
            if path.is_file():
                inputs[f"areas.{area}.{kind}"] = {"file": path.name, "sha256": sha256_file(path)}
    doc = {
        "command": command,
        "config": {k: v for k, v in cfg.echo().items() if k != "output.dir"},
        "use_actuals": cfg.use_actuals,
        "seed": cfg.seed,
        "versions": {
            "p2xsched": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernels": BACKEND,
        },
        "inputs": inputs,
        "outputs": {p.name: sha256_file(p) for p in sorted(outputs)},
    }
    return atomic_write_json(cfg.out_dir / "run.json", doc)


# -- commands -------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> list[Path]:
    price, intensity, generation, reports = load_inputs(cfg)
    out = cfg.out_dir
    written = [write_rows(out / "ingest_report.csv", list(reports.values()), INGEST_COLUMNS),
               atomic_write_json(out / "ingest_report.json", jsonable({k: r for k, r in reports.items()}))]
    written.append(write_series_csv(price, out / "clean_price.csv"))
    written.append(write_series_csv(intensity, out / "clean_intensity.csv"))
    if generation is not None:
        written.append(write_series_csv(generation, out / "clean_generation.csv"))
    for area, files in cfg.areas.items():
        for kind, path in files.items():
            q = Quantity.PRICE if kind == "price" else Quantity.CO2_INTENSITY
            if not path.is_file():
                raise ValidationError(f"input file not found: {path}")
            s, _ = load_hourly_csv(path, CsvSpec(area, q, "EUR/MWh" if kind == "price" else "gCO2eq/kWh"))
            repair_series(s, cfg.gap_policy)
    return written


def cmd_forecast(cfg: RunConfig) -> list[Path]:
    price, intensity, _, _ = load_inputs(cfg)
    days = horizon_days(cfg, price, intensity)
    fp, fi, runs_p, runs_i = run_forecasts(cfg, price, intensity, days)
    out = cfg.out_dir
    written = [write_series_csv(fp, out / "forecast_price.csv"), write_series_csv(fi, out / "forecast_intensity.csv")]
    fc = cfg.forecast
    sidecar = {
        "config": {"period": fc.period, "horizon": fc.horizon, "training_window": fc.training_window,
                   "trend_order": list(fc.trend_order), "random_order": list(fc.random_order),
                   "reuse_fit": fc.reuse_fit, "issue_hour": fc.issue_hour,
                   "market_utc_offset_hours": fc.market_utc_offset_hours, "seed": fc.seed},
        "delivery_days": [days[0].isoformat(), days[1].isoformat()],
        "runs": {"price": runs_p, "intensity": runs_i},
    }
    quality = {}
    for name, f, a in (("price", fp, price), ("intensity", fi, intensity)):
        try:
            quality[name] = evaluate_forecast(f, a).as_dict()
        except P2XError as exc:
            quality[name] = {"error": str(exc)}
    sidecar["evaluation"] = quality
    written.append(atomic_write_json(out / "forecast.json", jsonable(sidecar)))
    return written


def cmd_schedule(cfg: RunConfig) -> list[Path]:
    price, intensity, _, _ = load_inputs(cfg)
    days = horizon_days(cfg, price, intensity)
    plan, actual, runs = build_plan(cfg, price, intensity, days)
    extra = {"mode": "actuals" if cfg.use_actuals else "forecast",
             "delivery_days": [days[0].isoformat(), days[1].isoformat()]}
    if runs is not None:
        extra["forecast_runs"] = runs
    return write_plan(plan, cfg.out_dir, extra, actual)


def _alignment(cfg: RunConfig, generation, actual):
    rows, summary = [], {}
    for strategy in Strategy:
        target = ScheduleTarget(cfg.target.flh_year, strategy, cfg.target.theta)
        sc = ScheduleConfig(**{**cfg.schedule.__dict__, "reference_mode": "self"})
        plan = schedule(target, None, actual, sc)
        try:
            res = generation_alignment(generation, plan, cfg.schedule.market_utc_offset_hours)
        except DegenerateInputError as exc:
            summary[strategy.value] = {"correlation": None, "note": str(exc)}
            continue
        summary[strategy.value] = {"correlation": res.correlation}
        rows += [{"strategy": strategy.value, "day": d, "generation": float(g), "scheduled_hours": int(c)}
                 for d, g, c in zip(res.days, res.generation, res.scheduled_hours)]
    return rows, summary


def cmd_evaluate(cfg: RunConfig) -> list[Path]:
    price, intensity, generation, _ = load_inputs(cfg)
    days = horizon_days(cfg, price, intensity)
    pts = actual_pairs(cfg, price, intensity, days)
    off = cfg.schedule.market_utc_offset_hours
    raw = cfg.schedule.raw_units
    theta = cfg.eval_theta
    out = cfg.out_dir
    written = []

    curves = []
    for strategy in cfg.eval_strategies:
        for case in Case:
            for parameter in Parameter:
                curves += flh_curve(pts, strategy, case, parameter, cfg.eval_flh, theta, raw, off)
    written.append(write_rows(out / "flh_curves.csv", curves, FLH_COLUMNS))

    improvements = improvement_rows(pts, cfg.eval_flh, cfg.eval_strategies, theta, cfg.area, raw, off)
    written.append(write_rows(out / "improvements.csv", improvements, IMPROVEMENT_COLUMNS))

    ratios = []
    for parameter in Parameter:
        for case in (Case.BEST, Case.TRADEOFF):
            ratios += random_baseline_ratio(pts, cfg.eval_durations, parameter, case, theta, off)
    written.append(write_rows(out / "ratios.csv", ratios, RATIO_COLUMNS))

    sweep = []
    for strategy in cfg.eval_strategies:
        sweep += angle_sweep(pts, cfg.target.flh_year, strategy, cfg.eval_angles, raw, off)
    written.append(write_rows(out / "angle_sweep.csv", sweep, ANGLE_COLUMNS))

    bundle = {
        "area": cfg.area,
        "delivery_days": [days[0].isoformat(), days[1].isoformat()],
        "theta": theta,
        "improvements": improvements,
        "midpoint_deltas": midpoint_deltas(pts, cfg.target.flh_year, theta, raw, off),
    }

    if cfg.areas:
        area_pts = {}
        for name, files in cfg.areas.items():
            p, _ = load_hourly_csv(files["price"], CsvSpec(name, Quantity.PRICE, "EUR/MWh"))
            c, _ = load_hourly_csv(files["intensity"], CsvSpec(name, Quantity.CO2_INTENSITY, "gCO2eq/kWh"))
            area_pts[name] = pair_series(repair_series(p, cfg.gap_policy), repair_series(c, cfg.gap_policy))
        rows, fit = correlation_improvement_study(area_pts, cfg.target.flh_year, theta, raw)
        written.append(write_rows(out / "area_study.csv", rows, AREA_COLUMNS))
        bundle["area_study"] = {"rows": rows, "fit": fit}

    if generation is not None:
        rows, summary = _alignment(cfg, generation, pts)
        written.append(write_rows(out / "alignment.csv", rows, ALIGNMENT_COLUMNS))
        bundle["alignment"] = summary

    written.append(atomic_write_json(out / "evaluation.json", jsonable(bundle)))
    return written


def cmd_sweep(cfg: RunConfig) -> list[Path]:
    price, intensity, _, _ = load_inputs(cfg)
    days = horizon_days(cfg, price, intensity)
    pts = actual_pairs(cfg, price, intensity, days)
    off = cfg.schedule.market_utc_offset_hours
    raw = cfg.schedule.raw_units
    sweep = []
    for strategy in cfg.eval_strategies:
        sweep += angle_sweep(pts, cfg.target.flh_year, strategy, cfg.eval_angles, raw, off)
    out = cfg.out_dir
    return [
        write_rows(out / "angle_sweep.csv", sweep, ANGLE_COLUMNS),
        atomic_write_json(out / "sweep.json", jsonable({
            "flh": cfg.target.flh_year,
            "sweep": sweep,
            "midpoint_deltas": midpoint_deltas(pts, cfg.target.flh_year, cfg.eval_theta, raw, off),
        })),
    ]


COMMANDS = {
    "ingest": cmd_ingest,
    "forecast": cmd_forecast,
    "schedule": cmd_schedule,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="p2xsched", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat key = value config file")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--seed", type=int, help="seed for plug-in forecasters (overrides seed)")
    ap.add_argument("--use-actuals", action="store_true", help="schedule on actual data instead of forecasts")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if args.out:
        overrides["output.dir"] = str(Path(args.out).resolve())
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.use_actuals:
        overrides["use_actuals"] = "true"
    try:
        cfg = load_config(args.config, overrides)
        written = COMMANDS[args.command](cfg)
        _manifest(cfg, args.command, written)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateInputError, DegenerateFitError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception:
        log.exception("unexpected failure")
        return 1
    for p in written:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
