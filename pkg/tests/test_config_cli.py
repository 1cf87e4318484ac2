import json
import shutil

import pytest

from conftest import SAMPLE, SAMPLE_CONFIG
from p2xsched.cli import main
from p2xsched.config import build_config, load_config, parse_config_text
from p2xsched.errors import ConfigError

MINIMAL = {"data.price.path": "p.csv", "data.intensity.path": "c.csv"}


def test_parse_grammar():
    kv = parse_config_text("# comment\n; other\n\na = 1\nb.c =  x = y \n")
    assert kv == {"a": "1", "b.c": "x = y"}
    with pytest.raises(ConfigError):
        parse_config_text("novalue\n")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2\n")


def test_defaults_and_overrides(tmp_path):
    cfg = build_config(MINIMAL, tmp_path, {"schedule.flh_year": 4000, "evaluate.durations": "1-3,24"})
    assert cfg.price.path == tmp_path / "p.csv"
    assert cfg.target.flh_year == 4000 and cfg.target.strategy.value == "yearly"
    assert cfg.eval_durations == [1, 2, 3, 24]
    assert cfg.forecast.trend_order == (24, 1, 0) and cfg.forecast.training_window == 2160
    assert cfg.schedule.reference_mode == "trailing"
    assert build_config({**MINIMAL, "use_actuals": "yes"}, tmp_path).schedule.reference_mode == "self"


@pytest.mark.parametrize("kv", [
    {"data.price.path": "p.csv"},
    {**MINIMAL, "schedule.flh": "6000"},
    {**MINIMAL, "schedule.strategy": "weekly"},
    {**MINIMAL, "schedule.flh_year": "lots"},
    {**MINIMAL, "forecast.trend_order": "1,2"},
    {**MINIMAL, "evaluate.angles": "0,120"},
    {**MINIMAL, "areas.X.price": "a.csv"},
    {**MINIMAL, "data.price.unit": "USD/MWh"},
    {**MINIMAL, "gap.mode": "guess"},
])
def test_invalid_configs(tmp_path, kv):
    with pytest.raises(ConfigError):
        build_config(kv, tmp_path)


def test_sample_config_loads():
    cfg = load_config(SAMPLE_CONFIG)
    assert cfg.area == "DK-2" and len(cfg.areas) == 6 and cfg.generation is not None
    assert "output.dir" in cfg.echo()


@pytest.fixture
def bundle(tmp_path):
    dst = tmp_path / "sample"
    shutil.copytree(SAMPLE, dst)
    return dst / "sample.cfg"


@pytest.mark.parametrize("command,expected", [
    ("ingest", {"ingest_report.csv", "clean_price.csv", "clean_intensity.csv"}),
    ("forecast", {"forecast_price.csv", "forecast_intensity.csv", "forecast.json"}),
    ("schedule", {"plan.csv", "plan.json"}),
    ("evaluate", {"flh_curves.csv", "improvements.csv", "ratios.csv", "angle_sweep.csv", "area_study.csv",
                  "alignment.csv", "evaluation.json"}),
    ("sweep", {"angle_sweep.csv", "sweep.json"}),
])
def test_commands_write_outputs_and_manifest(bundle, tmp_path, command, expected):
    out = tmp_path / "out"
    assert main([command, "--config", str(bundle), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert expected <= names and "run.json" in names
    manifest = json.loads((out / "run.json").read_text())
    assert manifest["command"] == command
    assert "output.dir" not in manifest["config"]
    assert set(manifest["outputs"]) == names - {"run.json"}
    assert manifest["inputs"]["price"]["file"] == "dk2_price.csv"
    assert manifest["versions"]["kernels"] in ("compiled", "python")


def test_inputs_are_not_modified(bundle, tmp_path):
    before = {p.name: p.read_bytes() for p in bundle.parent.glob("*.csv")}
    main(["evaluate", "--config", str(bundle), "--out", str(tmp_path / "o")])
    assert before == {p.name: p.read_bytes() for p in bundle.parent.glob("*.csv")}


def test_schedule_use_actuals_and_flags(bundle, tmp_path):
    out = tmp_path / "o"
    assert main(["schedule", "--config", str(bundle), "--out", str(out), "--use-actuals", "--seed", "3",
                 "--set", "schedule.strategy=yearly", "--set", "schedule.flh_year=4000"]) == 0
    plan = json.loads((out / "plan.json").read_text())
    assert plan["mode"] == "actuals"
    assert plan["summary"]["strategy"] == "yearly" and plan["summary"]["selected_total"] == 329
    manifest = json.loads((out / "run.json").read_text())
    assert manifest["seed"] == 3 and manifest["use_actuals"] is True


def test_exit_codes(bundle, tmp_path, capsys):
    assert main(["schedule", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert "missing.cfg" in capsys.readouterr().err
    assert main(["schedule", "--config", str(bundle), "--set", "gap.mode=reject", "--out", str(tmp_path / "o")]) == 2
    assert "2018-01-28T15:00:00+00:00" in capsys.readouterr().err
    assert main(["schedule", "--config", str(bundle), "--set", "schedule.flh_year=9000"]) == 2
    assert main(["schedule", "--config", str(bundle), "--set", "bogus"]) == 2
    (bundle.parent / "dk2_price.csv").unlink()
    assert main(["ingest", "--config", str(bundle), "--out", str(tmp_path / "o")]) == 2
    assert "dk2_price.csv" in capsys.readouterr().err


def test_degenerate_input_exit_code(tmp_path):
    stamps = [f"2018-01-{1 + h // 24:02d}T{h % 24:02d}:00:00Z" for h in range(24 * 3)]
    (tmp_path / "p.csv").write_text("timestamp,value\n" + "".join(f"{t},0\n" for t in stamps))
    (tmp_path / "c.csv").write_text("timestamp,value\n" + "".join(f"{t},{i % 7}\n" for i, t in enumerate(stamps)))
    cfg = tmp_path / "run.cfg"
    cfg.write_text("data.price.path = p.csv\ndata.intensity.path = c.csv\n")
    # all-zero prices: percentage improvements and ratios are undefined
    assert main(["evaluate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
