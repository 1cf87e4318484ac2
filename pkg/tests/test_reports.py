import csv
import io
import json
from datetime import datetime, timezone

import numpy as np

from p2xsched import PairedPoints
from p2xsched.evaluation import RatioRow
from p2xsched.reports import PLAN_COLUMNS, RATIO_COLUMNS, jsonable, plan_rows, rows_to_csv, write_plan
from p2xsched.scheduler import ScheduleConfig, ScheduleTarget, Strategy, schedule

T0 = datetime(2018, 1, 1, tzinfo=timezone.utc)


def test_rows_to_csv_uses_fixed_columns_and_repr_floats():
    text = rows_to_csv([RatioRow(1, "price", "best", 0.1 + 0.2, 3.0, float("nan"))], RATIO_COLUMNS)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == RATIO_COLUMNS
    assert rows[1] == ["1", "price", "best", "0.30000000000000004", "3.0", ""]


def test_jsonable_handles_numpy_enums_and_nonfinite():
    doc = jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": Strategy.DAILY, "d": float("inf"), "e": T0})
    assert doc == {"a": 1.5, "b": [0, 1, 2], "c": "daily", "d": None, "e": "2018-01-01T00:00:00+00:00"}
    json.dumps(doc, allow_nan=False)


def test_write_plan(tmp_path, rng):
    pts = PairedPoints.from_arrays(rng.uniform(10, 90, 48), rng.uniform(100, 500, 48), T0)
    plan = schedule(ScheduleTarget(4380, "daily", 45), None, pts, ScheduleConfig(reference_mode="self"))
    rows = plan_rows(plan)
    assert len(rows) == 48 and sum(r["selected"] for r in rows) == 24
    csv_path, json_path = write_plan(plan, tmp_path, {"mode": "actuals"}, pts)
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header == PLAN_COLUMNS
    doc = json.loads(json_path.read_text())
    s = doc["summary"]
    assert s["selected_total"] == s["target_total"] == 24 and doc["mode"] == "actuals"
    assert s["realized_mean_price"] == s["mean_price"] and s["realized_hours"] == 24
    assert len(doc["ledger"]) == 2
