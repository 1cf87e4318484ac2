"""Regenerate the synthetic sample bundle under ``sample/``.

Sixty days of hourly data (30 days of history, then a 30-day scheduling
horizon starting 2018-01-17 local time, UTC+1) for a DK-2-like area, plus
30-day price/intensity pairs for a handful of areas with different
price/intensity coupling.  Wind drives both price and intensity down, which
is what makes the two series correlated.
"""
import argparse
import csv
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

START = datetime(2017, 12, 17, 23, tzinfo=timezone.utc)  # 2017-12-18 00:00 at UTC+1
DAYS = 60


def _wind(rng, n, mean, sd, phi=0.97):
    w = np.empty(n)
    w[0] = 0.0
    eps = rng.normal(0.0, sd * np.sqrt(1 - phi ** 2), n)
    for t in range(1, n):
        w[t] = phi * w[t - 1] + eps[t]
    return np.clip(mean + w, 0.0, None)


def _daily(hours, shape):
    h = hours % 24
    morning = np.exp(-0.5 * ((h - 8) / 2.0) ** 2)
    evening = np.exp(-0.5 * ((h - 18) / 2.5) ** 2)
    night = -np.exp(-0.5 * ((h - 3) / 2.5) ** 2)
    return shape[0] * morning + shape[1] * evening + shape[2] * night


def make_area(rng, n, coupling, price_level=42.0, intensity_level=320.0):
    """``coupling`` in [0, 1] sets how much of the intensity follows the wind."""
    hours = np.arange(n) + 1  # local hour of day, UTC+1
    wind = _wind(rng, n, 1500.0, 700.0)
    weekday = ((np.arange(n) + 1) // 24) % 7
    weekend = np.isin(weekday, (5, 6)).astype(float)
    price = (price_level + _daily(hours, (9.0, 11.0, 6.0)) - 0.009 * (wind - 1500.0)
             - 5.0 * weekend + rng.normal(0.0, 3.0, n))
    imports = _wind(rng, n, 0.0, 60.0, phi=0.9)
    intensity = (intensity_level + _daily(hours + 2, (25.0, 35.0, 15.0))
                 - coupling * 0.07 * (wind - 1500.0) + (1 - coupling) * imports + rng.normal(0.0, 12.0, n))
    intensity = np.clip(intensity, 20.0, None)
    return np.round(price, 2), np.round(intensity, 2), np.round(wind, 1)


def write(path: Path, values, start=START, drop=()):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "value"])
        for i, v in enumerate(values):
            if i in drop:
                continue
            w.writerow([(start + timedelta(hours=i)).strftime("%Y-%m-%dT%H:%M:%SZ"), f"{v:.2f}"])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "sample", type=Path)
    ap.add_argument("--seed", default=2018, type=int)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    n = DAYS * 24
    price, intensity, wind = make_area(rng, n, coupling=0.8)
    # one missing hour, filled by the default gap policy
    write(args.out / "dk2_price.csv", price, drop={1000})
    write(args.out / "dk2_intensity.csv", intensity)
    write(args.out / "dk2_wind.csv", wind)
    areas_start = START + timedelta(days=30)
    for name, coupling, plevel, ilevel in [
        ("AA", 0.95, 40.0, 300.0), ("BB", 0.75, 44.0, 420.0), ("CC", 0.5, 38.0, 250.0),
        ("DD", 0.3, 47.0, 500.0), ("EE", 0.1, 41.0, 360.0), ("FF", 0.6, 43.0, 280.0),
    ]:
        p, c, _ = make_area(rng, 30 * 24, coupling, plevel, ilevel)
        write(args.out / "areas" / f"{name}_price.csv", p, start=areas_start)
        write(args.out / "areas" / f"{name}_intensity.csv", c, start=areas_start)


if __name__ == "__main__":
    main()
