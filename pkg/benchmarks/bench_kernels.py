"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Times each kernel on forecasting-sized inputs, then one full day-ahead
forecast with each backend swapped in.
"""
import argparse
import timeit
from contextlib import contextmanager

import numpy as np

from p2xsched import _kernels_py, kernels
from p2xsched.forecast import ForecastConfig, method1_forecast

try:
    from p2xsched import _kernels as _compiled
except ImportError:
    _compiled = None

NAMES = ("centered_moving_average", "seasonal_profile", "lag_matrix", "ar_predict")


@contextmanager
def backend(mod):
    saved = {n: getattr(kernels, n) for n in NAMES}
    try:
        for n in NAMES:
            setattr(kernels, n, getattr(mod, n))
        yield
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def cases(rng):
    x = rng.normal(40, 8, 2160)
    det = x - np.convolve(x, np.ones(24) / 24, "same")
    coef = rng.uniform(-0.05, 0.05, 24)
    return {
        "centered_moving_average": lambda m: m.centered_moving_average(x, 24),
        "seasonal_profile": lambda m: m.seasonal_profile(det, 24, 0),
        "lag_matrix": lambda m: m.lag_matrix(x, 24),
        "ar_predict": lambda m: m.ar_predict(coef, 0.1, x[-24:], 36),
    }


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    mods = [("python", _kernels_py)] + ([("compiled", _compiled)] if _compiled else [])
    if _compiled is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':26s}" + "".join(f"{n:>14s}" for n, _ in mods) + ("    speedup" if _compiled else ""))
    for name, fn in cases(rng).items():
        times = [best_of(lambda m=m: fn(m), args.repeat, 200) for _, m in mods]
        row = f"{name:26s}" + "".join(f"{t * 1e6:11.1f} us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:10.1f}x"
        print(row)

    t = np.arange(2160)
    series = 40 + 8 * np.sin(2 * np.pi * t / 24) + np.cumsum(rng.normal(0, 0.3, t.size))
    cfg = ForecastConfig()
    times = []
    for _, m in mods:
        with backend(m):
            times.append(best_of(lambda: method1_forecast(series, 36, cfg), args.repeat, 3))
    row = f"{'day-ahead forecast':26s}" + "".join(f"{t * 1e3:11.1f} ms" for t in times)
    if len(times) == 2:
        row += f"{times[0] / times[1]:10.1f}x"
    print(row)


if __name__ == "__main__":
    main()
