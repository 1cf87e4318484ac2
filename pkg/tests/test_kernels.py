import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2xsched import _kernels_py as py
from p2xsched import kernels

try:
    from p2xsched import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

BACKENDS = [py] + ([compiled] if compiled is not None else [])


def _ma_oracle(x, m):
    n, out = len(x), np.full(len(x), np.nan)
    if m % 2 == 0:
        h = m // 2
        for t in range(h, n - h):
            out[t] = (0.5 * x[t - h] + sum(x[t - h + 1:t + h]) + 0.5 * x[t + h]) / m
    else:
        h = m // 2
        for t in range(h, n - h):
            out[t] = sum(x[t - h:t + h + 1]) / m
    return out


def test_dispatch_reports_backend():
    assert kernels.BACKEND in ("compiled", "python")
    if compiled is not None:
        assert kernels.BACKEND == "compiled" or kernels.centered_moving_average is py.centered_moving_average


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("m", [1, 2, 3, 4, 7, 24])
def test_moving_average_matches_definition(impl, m, rng):
    x = rng.normal(size=80)
    np.testing.assert_allclose(impl.centered_moving_average(x, m), _ma_oracle(x, m), rtol=0, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_seasonal_profile_groups_by_phase(impl, rng):
    d = rng.normal(size=50)
    d[[0, 1, 49]] = np.nan
    for phase in (0, 3):
        want = [np.nanmean([d[i] for i in range(50) if (i + phase) % 7 == j]) for j in range(7)]
        np.testing.assert_allclose(impl.seasonal_profile(d, 7, phase), want, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_lag_matrix_and_ar_predict(impl):
    z = np.arange(6, dtype=float)
    X = impl.lag_matrix(z, 2)
    assert X.tolist() == [[1, 1, 0], [1, 2, 1], [1, 3, 2], [1, 4, 3]]
    # z[t] = 1 + 0.5 z[t-1] from z = 2 -> 2, 1.5 ... fixed point 2
    out = impl.ar_predict(np.array([0.5]), 1.0, np.array([4.0]), 3)
    np.testing.assert_allclose(out, [3.0, 2.5, 2.25])


@pytest.mark.skipif(compiled is None, reason="compiled extension not built")
@settings(max_examples=50, deadline=None)
@given(st.integers(30, 300), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_backends_agree(n, m, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) * 100
    ro = x.copy()
    ro.setflags(write=False)
    np.testing.assert_allclose(compiled.centered_moving_average(ro, m), py.centered_moving_average(x, m),
                               atol=1e-9, equal_nan=True)
    np.testing.assert_allclose(compiled.seasonal_profile(ro, m, seed % m), py.seasonal_profile(x, m, seed % m),
                               atol=1e-9)
    p = min(m, n - 1)
    np.testing.assert_array_equal(compiled.lag_matrix(ro, p), py.lag_matrix(x, p))
    coef = rng.uniform(-0.3, 0.3, p) / p
    np.testing.assert_allclose(compiled.ar_predict(coef, 0.1, ro[-p:], 40), py.ar_predict(coef, 0.1, x[-p:], 40),
                               atol=1e-9)


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = {**os.environ, "P2XSCHED_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import p2xsched; print(p2xsched.KERNEL_BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
