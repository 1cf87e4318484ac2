"""Schedule flexible electricity consumption on the day-ahead market.

Hours are picked on the trade-off between forecast prices and CO2 intensity,
and schedules are evaluated against best-case and random baselines.
"""
from .errors import P2XError
from .kernels import BACKEND as KERNEL_BACKEND
from .series import HourlySeries, HourPoint, NormalizationFrame, PairedPoints, Quantity, normalize_points, pair_series
from .stats import OlsFit, SummaryStats, ols_fit, pearson_correlation, summary_stats

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "HourlySeries",
    "HourPoint",
    "NormalizationFrame",
    "OlsFit",
    "P2XError",
    "PairedPoints",
    "Quantity",
    "SummaryStats",
    "normalize_points",
    "ols_fit",
    "pair_series",
    "pearson_correlation",
    "summary_stats",
]
