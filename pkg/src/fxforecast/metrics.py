"""Forecast-quality measures: MSE, Pearson R and Theil's inequality coefficient."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

__all__ = ["ForecastReport", "mse", "correlation", "theil", "evaluate", "reports_to_csv"]


def _pair(actual, predicted, min_len=1):
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} actual vs {p.shape[0]} predicted")
    if a.shape[0] < min_len:
        raise ValueError(f"need at least {min_len} values")
    return a, p


def mse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.mean((a - p) ** 2))


def correlation(actual, predicted) -> float:
    """Pearson correlation; raises when either series is constant."""
    a, p = _pair(actual, predicted, min_len=2)
    da, dp = a - a.mean(), p - p.mean()
    saa, spp = da @ da, dp @ dp
    if saa == 0 or spp == 0:
        raise ValueError("zero variance: correlation undefined")
    r = (da @ dp) / np.sqrt(saa * spp)
    return float(np.clip(r, -1.0, 1.0))


def theil(actual, predicted) -> float:
    """``RMSE / (RMS(actual) + RMS(predicted))``: 0 is a perfect forecast, 1 the worst."""
    a, p = _pair(actual, predicted)
    denom = np.sqrt(np.mean(a**2)) + np.sqrt(np.mean(p**2))
    if denom == 0:
        raise ValueError("theil undefined for two all-zero series")
    return float(min(np.sqrt(np.mean((a - p) ** 2)) / denom, 1.0))


@dataclass(frozen=True)
class ForecastReport:
    partition: str
    n: int
    mse: float
    r: float | None
    theil: float | None

    def to_dict(self) -> dict:
        return {"partition": self.partition, "n": self.n, "mse": self.mse, "r": self.r, "theil": self.theil}


def evaluate(actual, predicted, partition: str = "test") -> ForecastReport:
    """All three measures; ``r``/``theil`` are ``None`` where undefined."""
    a, p = _pair(actual, predicted)
    try:
        r = correlation(a, p)
    except ValueError:
        r = None
    try:
        ti = theil(a, p)
    except ValueError:
        ti = None
    return ForecastReport(partition, int(a.shape[0]), mse(a, p), r, ti)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["partition", "n", "mse", "r", "theil"])
    for rep in reports:
        w.writerow([rep.partition, rep.n, repr(rep.mse), "" if rep.r is None else repr(rep.r), "" if rep.theil is None else repr(rep.theil)])
    return buf.getvalue()
