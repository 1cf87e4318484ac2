"""NumPy implementations of the numeric kernels; used when the compiled module is absent."""
import numpy as np


def centered_moving_average(x, m):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.full(n, np.nan)
    if m % 2 == 0:
        h = m // 2
        w = np.ones(m + 1)
        w[0] = w[-1] = 0.5
    else:
        h = (m - 1) // 2
        w = np.ones(m)
    if n > 2 * h:
        out[h:n - h] = np.convolve(x, w, mode="valid") / m
    return out


def seasonal_profile(detrended, m, phase):
    """Mean of non-NaN ``detrended[i]`` grouped by ``(i + phase) % m``."""
    d = np.ascontiguousarray(detrended, dtype=np.float64)
    keys = (np.arange(d.shape[0]) + phase) % m
    ok = ~np.isnan(d)
    sums = np.bincount(keys[ok], weights=d[ok], minlength=m)
    counts = np.bincount(keys[ok], minlength=m)
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts


def lag_matrix(z, p):
    """Rows ``[1, z[t-1], ..., z[t-p]]`` for ``t = p .. n-1``."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    n = z.shape[0]
    rows = n - p
    X = np.empty((rows, p + 1))
    X[:, 0] = 1.0
    for j in range(1, p + 1):
        X[:, j] = z[p - j:n - j]
    return X


def ar_predict(coef, intercept, history, horizon):
    """Iterate ``z[t] = intercept + sum_j coef[j] * z[t-1-j]``; ``history`` is oldest-first."""
    coef = np.asarray(coef, dtype=np.float64)
    p = coef.shape[0]
    buf = list(np.asarray(history, dtype=np.float64)[-p:]) if p else []
    out = np.empty(horizon)
    for h in range(horizon):
        acc = intercept
        for j in range(p):
            acc += coef[j] * buf[-1 - j]
        out[h] = acc
        buf.append(acc)
    return out
