"""Summary statistics, Pearson correlation and simple OLS with a slope t-test."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import betainc

from .errors import DegenerateInputError, EmptySeriesError, LengthError
from .series import HourlySeries


@dataclass(frozen=True)
class SummaryStats:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float
    sd: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OlsFit:
    slope: float
    intercept: float
    r_squared: float
    p_value: float
    n: int

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=np.float64)

    def as_dict(self) -> dict:
        return asdict(self)


def _clean(values) -> np.ndarray:
    if isinstance(values, HourlySeries):
        values = values.values
    arr = np.asarray(values, dtype=np.float64)
    return arr[~np.isnan(arr)]


def summary_stats(series) -> SummaryStats:
    """Quartiles use linear interpolation between order statistics; sd uses n-1."""
    v = _clean(series)
    if v.size == 0:
        raise EmptySeriesError("summary statistics need at least one non-missing value")
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return SummaryStats(float(v.min()), float(q1), float(med), float(v.mean()), float(q3), float(v.max()), sd)


def _pair(x, y, min_n):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthError(f"x and y must be 1-d with equal length, got {x.shape} and {y.shape}")
    if x.size < min_n:
        raise LengthError(f"need at least {min_n} observations, got {x.size}")
    return x, y


def pearson_correlation(x, y) -> float:
    x, y = _pair(x, y, 2)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("correlation is undefined for a zero-variance input")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p-value of Student's t via the regularized incomplete beta."""
    if np.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def ols_fit(x, y) -> OlsFit:
    """Least-squares line ``y = intercept + slope * x``.

    A constant ``y`` yields slope 0, ``r_squared`` 0 and ``p_value`` 1.
    """
    x, y = _pair(x, y, 3)
    n = x.size
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateInputError("regression is undefined for a constant regressor")
    slope = float(dx @ (y - ym)) / sxx
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    dy = y - ym
    ss_tot = float(dy @ dy)
    if ss_tot == 0.0:
        return OlsFit(slope, intercept, 0.0, 1.0, n)
    r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    df = n - 2
    se = np.sqrt(ss_res / df / sxx)
    t = np.inf if se == 0.0 else slope / se
    return OlsFit(slope, intercept, float(r2), t_two_sided_p(t, df), n)
