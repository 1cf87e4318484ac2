"""CSV/JSON serialization of plans, forecasts and evaluation results.

Column orders here are the documented file schemas; keep them stable.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path

import numpy as np

from ._io import atomic_write_json, atomic_write_text, fmt_float
from .scheduler import SchedulePlan

PLAN_COLUMNS = ["hour", "timestamp", "selected", "score", "rule", "price", "intensity"]
INGEST_COLUMNS = ["path", "rows_read", "rows_dropped", "gaps_found", "gaps_filled", "first_timestamp", "last_timestamp"]
FLH_COLUMNS = ["flh", "strategy", "case", "parameter", "mean_value"]
IMPROVEMENT_COLUMNS = ["area", "flh", "strategy", "parameter", "best", "compromised", "tradeoff", "improvement_pct"]
RATIO_COLUMNS = ["duration", "parameter", "case", "scheduled_mean", "random_mean", "ratio"]
ANGLE_COLUMNS = ["strategy", "flh", "angle", "mean_price", "mean_intensity"]
AREA_COLUMNS = ["area", "correlation", "improvement_pct"]
ALIGNMENT_COLUMNS = ["strategy", "day", "generation", "scheduled_hours"]


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = asdict(row) if is_dataclass(row) else row
        w.writerow([_cell(d[c]) for c in columns])
    return buf.getvalue()


def write_rows(path, rows, columns) -> Path:
    return atomic_write_text(path, rows_to_csv(rows, columns))


def jsonable(obj):
    """Convert dataclasses/numpy values into plain JSON types; non-finite floats become None."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if hasattr(obj, "isoformat"):
        return obj.isoformat()
    return obj


def plan_rows(plan: SchedulePlan) -> list[dict]:
    pts = plan.points
    chosen = np.zeros(len(pts), dtype=bool)
    chosen[plan.selected] = True
    stamps = pts.timestamps()
    return [
        {"hour": int(pts.index[i]), "timestamp": stamps[i].isoformat(), "selected": bool(chosen[i]),
         "score": float(plan.scores[i]), "rule": plan.rules[i], "price": float(pts.price[i]),
         "intensity": float(pts.intensity[i])}
        for i in range(len(pts))
    ]


def plan_summary(plan: SchedulePlan, actual=None) -> dict:
    """Means over the selected hours; ``actual`` (aligned PairedPoints) adds realized means."""
    sel = plan.selected
    out = {
        "flh_year": plan.target.flh_year,
        "strategy": plan.target.strategy.value,
        "theta": plan.target.theta,
        "target_total": plan.total_target,
        "selected_total": len(plan),
        "mean_price": float(plan.points.price[sel].mean()) if sel.size else None,
        "mean_intensity": float(plan.points.intensity[sel].mean()) if sel.size else None,
    }
    if actual is not None and sel.size:
        abs_plan = plan.points.start
        pos = {int(h): i for i, h in enumerate(actual.index.tolist())}
        shift = (abs_plan - actual.start).total_seconds() / 3600
        idx = [pos.get(int(h + shift)) for h in plan.hours.tolist()]
        idx = np.array([i for i in idx if i is not None], dtype=np.int64)
        if idx.size:
            out["realized_mean_price"] = float(actual.price[np.sort(idx)].mean())
            out["realized_mean_intensity"] = float(actual.intensity[np.sort(idx)].mean())
            out["realized_hours"] = int(idx.size)
    return out


def write_plan(plan: SchedulePlan, out_dir, extra: dict | None = None, actual=None) -> list[Path]:
    out_dir = Path(out_dir)
    csv_path = write_rows(out_dir / "plan.csv", plan_rows(plan), PLAN_COLUMNS)
    doc = {
        "summary": plan_summary(plan, actual),
        "ledger": jsonable(plan.ledger),
        "audit": jsonable(plan.audit),
        **(extra or {}),
    }
    json_path = atomic_write_json(out_dir / "plan.json", jsonable(doc))
    return [csv_path, json_path]
