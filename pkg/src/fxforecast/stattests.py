"""
Pre-flight hypothesis tests: normality, unit roots and ARCH effects.

All tests return a :class:`TestResult`.  Unit-root p-values come from
MacKinnon's response surfaces (see ``_mackinnon``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import stats

from . import _mackinnon
from ._ols import SingularDesignError, ols
from .dataio import DataError, ZeroVarianceError, describe

__all__ = [
    "TestResult",
    "AdfRegression",
    "InsufficientDataError",
    "SingularDesignError",
    "significance_stars",
    "jarque_bera",
    "jarque_bera_statistic",
    "adf_test",
    "adf_regression",
    "pp_test",
    "arch_lm_test",
    "newey_west_lrv",
    "default_adf_max_lag",
    "default_nw_bandwidth",
]

_TRENDS = {
    "n": "n", "nc": "n", "none": "n",
    "c": "c", "constant": "c",
    "ct": "ct", "constant+trend": "ct", "trend": "ct",
}


class InsufficientDataError(DataError):
    pass


def _trend(spec: str) -> str:
    try:
        return _TRENDS[spec]
    except KeyError:
        raise ValueError(f"unknown trend specification {spec!r}") from None


def significance_stars(p_value: float) -> str:
    """``***`` at 1%, ``**`` at 5%, ``*`` at 10%, else empty."""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.10:
        return "*"
    return ""


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test.

    ``decision`` is ``"reject"`` when ``p_value < level``.  ``nuisance`` holds
    the lag order or bandwidth actually used; ``extra`` carries secondary
    forms of the statistic (critical values, chi-square variant, df ...).
    """

    __test__ = False  # keep pytest from collecting this class

    test: str
    statistic: float
    p_value: float
    level: float = 0.05
    nuisance: Any = None
    spec: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        p = float(self.p_value)
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p-value {p} outside [0, 1]")

    @property
    def reject(self) -> bool:
        return self.p_value < self.level

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "fail-to-reject"

    def at_level(self, level: float) -> "TestResult":
        return TestResult(self.test, self.statistic, self.p_value, level, self.nuisance, self.spec, self.extra)

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic": float(self.statistic),
            "p_value": float(self.p_value),
            "spec": self.spec,
            "nuisance": self.nuisance,
            "decision": self.decision,
            "level": self.level,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __str__(self) -> str:
        return f"{self.test}: {self.statistic:.4f} (p={self.p_value:.4f}){significance_stars(self.p_value)}"


def jarque_bera_statistic(n: int, skewness: float, kurtosis: float) -> float:
    """``n/6 * (S^2 + (K - 3)^2 / 4)`` with raw kurtosis ``K``."""
    return n / 6.0 * (skewness**2 + (kurtosis - 3.0) ** 2 / 4.0)


def jarque_bera(series, level: float = 0.05) -> TestResult:
    x = np.asarray(series, dtype=float)
    if x.shape[0] < 8:
        raise InsufficientDataError("Jarque-Bera needs at least 8 observations")
    d = describe(x)
    jb = jarque_bera_statistic(x.shape[0], d.skewness, d.kurtosis)
    return TestResult("jarque_bera", jb, float(stats.chi2.sf(jb, 2)), level, extra={"skewness": d.skewness, "kurtosis": d.kurtosis})


def default_adf_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def default_nw_bandwidth(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _deterministic(trend: str, nobs: int, start: int = 1) -> np.ndarray:
    if trend == "n":
        return np.empty((nobs, 0))
    const = np.ones((nobs, 1))
    if trend == "c":
        return const
    return np.column_stack([const, np.arange(start, start + nobs, dtype=float)])


@dataclass
class AdfRegression:
    """OLS fit of ``dy_t = a + b*t + g*y_{t-1} + sum d_i dy_{t-i} + e_t``.

    ``params`` is ordered deterministic terms, ``gamma``, lag coefficients.
    """

    trend: str
    lags: int
    params: np.ndarray
    bse: np.ndarray
    resid: np.ndarray
    nobs: int

    @property
    def gamma_index(self) -> int:
        return {"n": 0, "c": 1, "ct": 2}[self.trend]

    @property
    def gamma(self) -> float:
        return float(self.params[self.gamma_index])

    @property
    def gamma_se(self) -> float:
        return float(self.bse[self.gamma_index])

    @property
    def tstat(self) -> float:
        return self.gamma / self.gamma_se


def _adf_design(y: np.ndarray, lags: int, trend: str, drop: int | None = None):
    """Response and regressors, using rows from ``drop`` (>= lags) onward."""
    dy = np.diff(y)
    drop = lags if drop is None else drop
    nobs = dy.shape[0] - drop
    cols = [y[drop:-1][:, None]]
    for i in range(1, lags + 1):
        cols.append(dy[drop - i: dy.shape[0] - i][:, None])
    X = np.hstack([_deterministic(trend, nobs, start=drop + 1)] + cols)
    return dy[drop:], X


def adf_regression(series, lags: int, spec: str = "c") -> AdfRegression:
    trend = _trend(spec)
    y = np.asarray(series, dtype=float)
    lhs, X = _adf_design(y, lags, trend)
    res = ols(lhs, X)
    return AdfRegression(trend, lags, res.params, res.bse, res.resid, res.nobs)


def adf_test(
    series,
    spec: str = "c",
    max_lag: int | None = None,
    lag_selection: str = "aic",
    level: float = 0.05,
) -> TestResult:
    """Augmented Dickey-Fuller test of a unit root (``gamma = 0``) against ``gamma < 0``.

    Parameters
    ----------
    series : array_like
        Levels to test.
    spec : {"n", "c", "ct"}
        No deterministic terms, constant, or constant and linear trend.
    max_lag : int, optional
        Largest lag of ``dy`` considered; default ``floor(12 (n/100)^(1/4))``.
    lag_selection : {"aic", "bic", "fixed"}
        Choose the lag minimising the criterion over ``0..max_lag`` on a
        common sample, or use ``max_lag`` as given.
    level : float
        Significance level for the decision.
    """
    trend = _trend(spec)
    y = np.asarray(series, dtype=float)
    n = y.shape[0]
    if max_lag is None:
        max_lag = default_adf_max_lag(n)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if n < 25 + max_lag:
        raise InsufficientDataError(f"ADF with max_lag={max_lag} needs at least {25 + max_lag} observations")

    if lag_selection == "fixed":
        lags = max_lag
    elif lag_selection in ("aic", "bic"):
        best = None
        for p in range(max_lag + 1):
            lhs, X = _adf_design(y, p, trend, drop=max_lag)
            res = ols(lhs, X)
            penalty = 2.0 if lag_selection == "aic" else math.log(res.nobs)
            ic = res.nobs * math.log(res.ssr / res.nobs) + penalty * res.k
            if best is None or ic < best[0]:
                best = (ic, p)
        lags = best[1]
    else:
        raise ValueError(f"unknown lag_selection {lag_selection!r}")

    reg = adf_regression(y, lags, trend)
    stat = reg.tstat
    return TestResult(
        "adf",
        stat,
        _mackinnon.tau_pvalue(stat, trend),
        level,
        nuisance=lags,
        spec=trend,
        extra={"nobs": reg.nobs, "critical_values": _mackinnon.tau_critical_values(trend, reg.nobs)},
    )


def newey_west_lrv(series, bandwidth: int, demean: bool = True) -> float:
    """Bartlett-kernel long-run variance.

    ``gamma_0 + 2 sum_{j=1}^{L} (1 - j/(L+1)) gamma_j`` with autocovariances
    normalised by ``n``; with ``bandwidth=0`` this is the biased variance.
    """
    if bandwidth < 0:
        raise ValueError("bandwidth must be non-negative")
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if n < bandwidth + 2:
        raise InsufficientDataError(f"need at least {bandwidth + 2} observations")
    if demean:
        x = x - x.mean()
    lrv = x @ x / n
    for j in range(1, bandwidth + 1):
        lrv += 2.0 * (1.0 - j / (bandwidth + 1.0)) * (x[j:] @ x[:-j]) / n
    return float(lrv)


def pp_test(series, spec: str = "c", bandwidth: int | None = None, level: float = 0.05) -> TestResult:
    """Phillips-Perron ``Z_tau`` unit-root test.

    Runs the Dickey-Fuller regression without lagged differences and corrects
    the t-ratio with a Newey-West long-run variance of the residuals.  The
    default bandwidth is ``floor(4 (n/100)^(2/9))``.
    """
    trend = _trend(spec)
    y = np.asarray(series, dtype=float)
    n = y.shape[0]
    if n < 25:
        raise InsufficientDataError("Phillips-Perron needs at least 25 observations")
    if bandwidth is None:
        bandwidth = default_nw_bandwidth(n)
    lhs, X = _adf_design(y, 0, trend)
    res = ols(lhs, X)
    gi = {"n": 0, "c": 1, "ct": 2}[trend]
    gamma, se = res.params[gi], res.bse[gi]
    if not se > 0:
        raise ZeroVarianceError("zero coefficient variance in the Phillips-Perron regression")
    u = res.resid
    nobs = res.nobs
    lam2 = newey_west_lrv(u, bandwidth, demean=False)
    s = math.sqrt(res.sigma2)
    gamma0 = res.ssr / nobs
    stat = math.sqrt(gamma0 / lam2) * gamma / se - 0.5 * (lam2 - gamma0) / math.sqrt(lam2) * (nobs * se / s)
    return TestResult(
        "pp",
        stat,
        _mackinnon.tau_pvalue(stat, trend),
        level,
        nuisance=bandwidth,
        spec=trend,
        extra={"nobs": nobs, "critical_values": _mackinnon.tau_critical_values(trend, nobs)},
    )


def arch_lm_test(residuals, lags: int = 5, level: float = 0.05) -> TestResult:
    """Engle's LM test for ARCH effects.

    Regresses squared residuals on a constant and ``lags`` of themselves.  The
    reported statistic is the joint-significance F; the ``n R^2`` chi-square
    form is in ``extra``.
    """
    e = np.asarray(residuals, dtype=float)
    n = e.shape[0]
    if lags < 1:
        raise ValueError("lags must be >= 1")
    if n < lags + 10:
        raise InsufficientDataError(f"ARCH-LM with {lags} lags needs at least {lags + 10} observations")
    e2 = e**2
    if np.ptp(e) == 0 or np.ptp(e2) == 0:
        raise ZeroVarianceError("degenerate residuals: squared residuals are constant")
    lhs = e2[lags:]
    X = np.column_stack([np.ones(n - lags)] + [e2[lags - i: n - i] for i in range(1, lags + 1)])
    res = ols(lhs, X)
    m = res.nobs
    sst = np.sum((lhs - lhs.mean()) ** 2)
    r2 = 1.0 - res.ssr / sst
    df_den = m - lags - 1
    f_stat = (r2 / lags) / ((1.0 - r2) / df_den)
    lm = m * r2
    return TestResult(
        "arch_lm",
        f_stat,
        float(stats.f.sf(f_stat, lags, df_den)),
        level,
        nuisance=lags,
        extra={"lm_statistic": lm, "lm_p_value": float(stats.chi2.sf(lm, lags)), "df": (lags, df_den)},
    )
