"""
GARCH(p, q) and EGARCH(p, q) with a linear exogenous mean equation.

The mean equation is ``y_t = c + x_t' b + e_t`` and the conditional variance
``h_t`` of ``e_t`` follows

* GARCH:  ``h_t = omega + sum_i alpha_i e_{t-i}^2 + sum_j beta_j h_{t-j}``
* EGARCH: ``log h_t = omega + sum_j beta_j log h_{t-j}
  + sum_i (alpha_i |z_{t-i}| + gamma_i z_{t-i})`` with ``z = e / sqrt(h)``.

Parameters are estimated by Gaussian quasi-maximum likelihood.  The optimiser
works on unconstrained coordinates: ``omega = exp(w)`` for GARCH, the ARCH and
GARCH weights through a softmax with a slack component (so their sum stays
below one), and EGARCH betas through the partial-autocorrelation (tanh)
map, which keeps the log-variance recursion stationary.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import optimize, stats

from ._ols import ols
from .dataio import DescriptiveStats, TimeSeriesFrame, ZeroVarianceError, describe
from .stattests import TestResult, jarque_bera, significance_stars

__all__ = [
    "GarchSpec",
    "GarchParams",
    "GarchFit",
    "ConvergenceError",
    "garch_filter",
    "egarch_filter",
    "gaussian_loglik",
    "fit",
    "information_criteria",
    "fit_statistics",
    "forecast",
    "static_mean_prediction",
    "residual_diagnostics",
]

FAMILIES = ("GARCH", "EGARCH")
PERSISTENCE_CAP = 1.0 - 1e-6
_LOG_2PI = math.log(2.0 * math.pi)
_E_ABS_Z = math.sqrt(2.0 / math.pi)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GarchSpec:
    """Model layout.

    ``difference`` lists columns (target and/or regressors) that are
    first-differenced before estimation; the first row is then dropped.
    ``literal_leverage`` switches the EGARCH sign term to ``e / h``.
    """

    family: str = "GARCH"
    p: int = 1
    q: int = 1
    regressors: tuple[str, ...] = ()
    intercept: bool = True
    target: str = "y"
    difference: tuple[str, ...] = ()
    literal_leverage: bool = False

    def __post_init__(self):
        family = self.family.upper()
        if family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "difference", tuple(self.difference))
        if self.p < 0 or self.q < 1:
            raise ValueError("need p >= 0 and q >= 1")

    @property
    def name(self) -> str:
        return f"{self.family}({self.p},{self.q})"

    @property
    def mean_names(self) -> list[str]:
        return (["const"] if self.intercept else []) + list(self.regressors)

    @property
    def variance_names(self) -> list[str]:
        names = ["omega"] + [f"alpha[{i}]" for i in range(1, self.q + 1)]
        if self.family == "EGARCH":
            names += [f"gamma[{i}]" for i in range(1, self.q + 1)]
        return names + [f"beta[{j}]" for j in range(1, self.p + 1)]

    @property
    def param_names(self) -> list[str]:
        return self.mean_names + self.variance_names

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "p": self.p,
            "q": self.q,
            "regressors": list(self.regressors),
            "intercept": self.intercept,
            "target": self.target,
            "difference": list(self.difference),
            "literal_leverage": self.literal_leverage,
        }


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha: np.ndarray
    beta: np.ndarray = field(default_factory=lambda: np.empty(0))
    gamma: np.ndarray = field(default_factory=lambda: np.empty(0))
    mean: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "mean"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def persistence(self) -> float:
        return float(self.alpha.sum() + self.beta.sum())

    def validate(self, family: str) -> None:
        if family == "GARCH":
            if not self.omega > 0:
                raise ValueError("GARCH needs omega > 0")
            if np.any(self.alpha < 0) or np.any(self.beta < 0):
                raise ValueError("GARCH needs non-negative alpha and beta")
            if not self.persistence < 1:
                raise ValueError("GARCH needs sum(alpha) + sum(beta) < 1")
        elif self.gamma.shape != self.alpha.shape:
            raise ValueError("EGARCH needs one gamma per alpha")

    def vector(self, family: str) -> np.ndarray:
        """Natural-space vector in ``GarchSpec.param_names`` order."""
        parts = [self.mean, [self.omega], self.alpha]
        if family == "EGARCH":
            parts.append(self.gamma)
        parts.append(self.beta)
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    @classmethod
    def from_vector(cls, theta, spec: GarchSpec) -> "GarchParams":
        theta = np.asarray(theta, dtype=float)
        k = len(spec.mean_names)
        pos = k
        omega = theta[pos]
        alpha = theta[pos + 1: pos + 1 + spec.q]
        pos += 1 + spec.q
        gamma = np.empty(0)
        if spec.family == "EGARCH":
            gamma = theta[pos: pos + spec.q]
            pos += spec.q
        beta = theta[pos: pos + spec.p]
        return cls(omega, alpha, beta, gamma, theta[:k])


# ---------------------------------------------------------------- filters


@njit(cache=True)
def _garch_recursion(eps, omega, alpha, beta, h0):
    n = eps.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    h = np.empty(n)
    for t in range(n):
        v = omega
        for i in range(1, q + 1):
            v += alpha[i - 1] * (eps[t - i] * eps[t - i] if t - i >= 0 else h0)
        for j in range(1, p + 1):
            v += beta[j - 1] * (h[t - j] if t - j >= 0 else h0)
        h[t] = v
    return h


@njit(cache=True)
def _egarch_recursion(eps, omega, alpha, gamma, beta, h0, literal):
    n = eps.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    logh = np.empty(n)
    h = np.empty(n)
    z = np.empty(n)
    lh0 = math.log(h0)
    for t in range(n):
        v = omega
        for j in range(1, p + 1):
            v += beta[j - 1] * (logh[t - j] if t - j >= 0 else lh0)
        for i in range(1, q + 1):
            if t - i >= 0:
                v += alpha[i - 1] * abs(z[t - i]) + gamma[i - 1] * (eps[t - i] / h[t - i] if literal else z[t - i])
        if v > 700.0:
            v = 700.0
        elif v < -700.0:
            v = -700.0
        logh[t] = v
        h[t] = math.exp(v)
        z[t] = eps[t] / math.sqrt(h[t])
    return h


def garch_filter(params: GarchParams, eps, h0: float) -> np.ndarray:
    """Conditional variances ``h_1..h_n``; pre-sample ``e^2`` and ``h`` equal ``h0``."""
    if not h0 > 0:
        raise ValueError("initial variance h0 must be positive")
    eps = np.ascontiguousarray(eps, dtype=float)
    return _garch_recursion(eps, params.omega, params.alpha, params.beta, float(h0))


def egarch_filter(params: GarchParams, eps, h0: float, literal: bool = False) -> np.ndarray:
    """EGARCH conditional variances.

    Pre-sample log-variances equal ``log h0`` and pre-sample shocks are zero,
    so ``log h_1 = omega + sum(beta) log h0``.  ``literal=True`` uses ``e / h``
    in the sign term instead of the standardised shock.  The log-variance is
    clipped to [-700, 700] so that ``h`` stays finite and positive.
    """
    if not h0 > 0:
        raise ValueError("initial variance h0 must be positive")
    eps = np.ascontiguousarray(eps, dtype=float)
    gamma = params.gamma if params.gamma.size else np.zeros_like(params.alpha)
    return _egarch_recursion(eps, params.omega, params.alpha, gamma, params.beta, float(h0), bool(literal))


def _variance_path(spec: GarchSpec, params: GarchParams, eps, h0: float) -> np.ndarray:
    if spec.family == "GARCH":
        return garch_filter(params, eps, h0)
    return egarch_filter(params, eps, h0, spec.literal_leverage)


def _loglik_terms(eps, h) -> np.ndarray:
    return -0.5 * (_LOG_2PI + np.log(h) + eps**2 / h)


# ---------------------------------------------------------------- data


def _mean_data(spec: GarchSpec, frame: TimeSeriesFrame):
    """Target, mean-equation design matrix and dates after optional differencing."""
    missing = [c for c in (spec.target,) + spec.regressors if c not in frame]
    if missing:
        raise KeyError(f"missing column(s): {missing}")

    def col(name):
        v = np.asarray(frame[name], dtype=float)
        if spec.difference:
            return np.diff(v) if name in spec.difference else v[1:]
        return v

    y = col(spec.target)
    dates = frame.dates[1:] if spec.difference else frame.dates
    cols = [np.ones_like(y)] if spec.intercept else []
    cols += [col(r) for r in spec.regressors]
    X = np.column_stack(cols) if cols else np.empty((y.shape[0], 0))
    return y, X, dates


def _backcast(resid) -> float:
    return float(np.mean(resid**2))


def _initial_variance(spec: GarchSpec, params: GarchParams, X, y) -> float:
    """Pre-sample variance from OLS residuals of the mean equation."""
    resid = ols(y, X).resid if X.shape[1] else y
    h0 = _backcast(resid)
    if h0 > 0:
        return h0
    if spec.family == "GARCH":
        return params.omega / max(1.0 - params.persistence, 1e-12)
    return math.exp(params.omega / max(1.0 - params.beta.sum(), 1e-12))


def gaussian_loglik(spec: GarchSpec, params: GarchParams, frame: TimeSeriesFrame, h0: float | None = None) -> float:
    """Gaussian log-likelihood ``-1/2 sum(log 2pi + log h_t + e_t^2 / h_t)``.

    ``h0`` defaults to the mean of squared OLS residuals of the mean equation.
    """
    y, X, _ = _mean_data(spec, frame)
    if params.mean.shape[0] != X.shape[1]:
        raise ValueError(f"expected {X.shape[1]} mean coefficients, got {params.mean.shape[0]}")
    eps = y - X @ params.mean
    if h0 is None:
        h0 = _initial_variance(spec, params, X, y)
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        try:
            h = _variance_path(spec, params, eps, h0)
            ll = float(np.sum(_loglik_terms(eps, h)))
        except FloatingPointError as exc:
            raise FloatingPointError(f"non-finite likelihood: {exc}") from exc
    if not np.isfinite(ll):
        raise FloatingPointError("non-finite likelihood")
    return ll


# ---------------------------------------------------------------- transforms


def _pacf_to_ar(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson map from partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    phi = np.empty(0)
    for k, rk in enumerate(r):
        phi = np.append(phi - rk * phi[::-1], rk) if k else np.array([rk])
    return phi


def _ar_to_pacf(phi: np.ndarray) -> np.ndarray:
    phi = np.array(phi, dtype=float)
    r = np.empty(phi.shape[0])
    for k in range(phi.shape[0] - 1, -1, -1):
        rk = phi[k]
        r[k] = rk
        if k:
            phi = (phi[:k] + rk * phi[:k][::-1]) / (1.0 - rk**2)
    return r


def _to_natural(u: np.ndarray, spec: GarchSpec) -> GarchParams:
    k = len(spec.mean_names)
    mean, w = u[:k], u[k]
    if spec.family == "GARCH":
        v = np.clip(u[k + 1:], -60.0, 60.0)
        ev = np.exp(v - max(v.max(initial=0.0), 0.0))
        slack = math.exp(-max(v.max(initial=0.0), 0.0))
        weights = PERSISTENCE_CAP * ev / (slack + ev.sum())
        return GarchParams(math.exp(min(w, 700.0)), weights[: spec.q], weights[spec.q:], mean=mean)
    alpha = u[k + 1: k + 1 + spec.q]
    gamma = u[k + 1 + spec.q: k + 1 + 2 * spec.q]
    beta = _pacf_to_ar(np.tanh(u[k + 1 + 2 * spec.q:]))
    return GarchParams(w, alpha, beta, gamma, mean)


def _to_unconstrained(params: GarchParams, spec: GarchSpec) -> np.ndarray:
    if spec.family == "GARCH":
        weights = np.concatenate([params.alpha, params.beta]) / PERSISTENCE_CAP
        weights = np.maximum(weights, 1e-8)
        slack = max(1.0 - weights.sum(), 1e-8)
        return np.concatenate([params.mean, [math.log(params.omega)], np.log(weights / slack)])
    pacf = np.clip(_ar_to_pacf(params.beta), -0.999999, 0.999999)
    return np.concatenate([params.mean, [params.omega], params.alpha, params.gamma, np.arctanh(pacf)])


# ---------------------------------------------------------------- fitting


@dataclass
class GarchFit:
    spec: GarchSpec
    params: GarchParams
    h: np.ndarray
    resid: np.ndarray
    std_resid: np.ndarray
    loglik: float
    nobs: int
    h0: float
    aic: float
    sic: float
    hqc: float
    r2: float
    adj_r2: float
    std_errors: np.ndarray
    converged: bool = True
    inference_reliable: bool = True
    dates: np.ndarray | None = None
    fitted_mean: np.ndarray | None = None

    @property
    def param_names(self) -> list[str]:
        return self.spec.param_names

    @property
    def coefficients(self) -> np.ndarray:
        return self.params.vector(self.spec.family)

    @property
    def zstats(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coefficients / self.std_errors

    @property
    def pvalues(self) -> np.ndarray:
        return 2.0 * stats.norm.sf(np.abs(self.zstats))

    def to_dict(self) -> dict:
        def num(x):
            x = float(x)
            return x if math.isfinite(x) else None

        coefs = []
        for name, est, se, z, pv in zip(self.param_names, self.coefficients, self.std_errors, self.zstats, self.pvalues):
            coefs.append({
                "name": name,
                "estimate": num(est),
                "std_error": num(se),
                "z": num(z),
                "p_value": num(pv),
                "stars": significance_stars(pv) if math.isfinite(pv) else "",
            })
        return {
            "family": self.spec.family,
            "p": self.spec.p,
            "q": self.spec.q,
            "coefficients": coefs,
            "loglik": num(self.loglik),
            "aic": num(self.aic),
            "sic": num(self.sic),
            "hqc": num(self.hqc),
            "r2": num(self.r2),
            "adj_r2": num(self.adj_r2),
            "nobs": self.nobs,
            "converged": self.converged,
            "inference_reliable": self.inference_reliable,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def information_criteria(loglik: float, k: int, n: int, per_observation: bool = True) -> tuple[float, float, float]:
    """AIC, Schwarz (SIC) and Hannan-Quinn (HQC) criteria.

    Divided by ``n`` by default; ``per_observation=False`` gives the totals.
    """
    if not (n > k >= 1):
        raise ValueError("need n > k >= 1")
    base = -2.0 * loglik
    aic = base + 2.0 * k
    sic = base + k * math.log(n)
    hqc = base + 2.0 * k * math.log(math.log(n))
    if per_observation:
        return aic / n, sic / n, hqc / n
    return aic, sic, hqc


def _r2(y, fitted, k_regressors: int) -> tuple[float, float]:
    n = y.shape[0]
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0:
        raise ZeroVarianceError("zero target variance: R-squared undefined")
    r2 = 1.0 - float(np.sum((y - fitted) ** 2)) / sst
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - k_regressors - 1)
    return r2, adj


def fit_statistics(fit: GarchFit, frame: TimeSeriesFrame) -> tuple[float, float]:
    """Mean-equation R-squared and adjusted R-squared on ``frame``."""
    y, X, _ = _mean_data(fit.spec, frame)
    return _r2(y, X @ fit.params.mean, len(fit.spec.regressors))


def _numerical_hessian(f, x: np.ndarray) -> np.ndarray:
    k = x.shape[0]
    step = 1e-4 * np.maximum(1.0, np.abs(x))
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = step[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / step[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = step[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * step[i] * step[j])
    return H


def _start_values(spec: GarchSpec, mean0: np.ndarray, var0: float) -> GarchParams:
    if spec.family == "GARCH":
        a, b = 0.05, 0.90 if spec.p else 0.0
        alpha = np.full(spec.q, a / spec.q)
        beta = np.full(spec.p, b / spec.p) if spec.p else np.empty(0)
        return GarchParams(var0 * (1.0 - a - b), alpha, beta, mean=mean0)
    b = 0.9 if spec.p else 0.0
    alpha = np.full(spec.q, 0.1 / spec.q)
    beta = np.zeros(spec.p)
    if spec.p:
        beta[0] = b
    omega = (1.0 - b) * math.log(var0) - alpha.sum() * _E_ABS_Z
    return GarchParams(omega, alpha, beta, np.zeros(spec.q), mean0)


def fit(spec: GarchSpec, frame: TimeSeriesFrame, seed: int = 0, restarts: int = 5) -> GarchFit:
    """Quasi-maximum-likelihood estimation.

    A Nelder-Mead warm start from OLS mean coefficients and moment-based
    variance parameters is polished by BFGS.  If the result is not a clean
    convergence, up to ``restarts`` perturbed starts (seeded) are tried and
    the best likelihood is kept.  Standard errors come from the inverse
    numerical Hessian of the negative log-likelihood in natural parameters;
    when that Hessian is not positive definite the fit is still returned with
    ``inference_reliable=False``.
    """
    y, X, dates = _mean_data(spec, frame)
    n, k_mean = X.shape
    if n < 30 + k_mean:
        raise ValueError(f"need at least {30 + k_mean} observations, got {n}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValueError("target and regressors must be finite")

    if k_mean:
        res = ols(y, X)
        mean0, resid0 = res.params, res.resid
    else:
        mean0, resid0 = np.empty(0), y
    h0 = _backcast(resid0)
    if not h0 > 0:
        raise ZeroVarianceError("mean-equation residuals have zero variance")

    # mean coefficients are optimised relative to OLS and in units of their
    # OLS standard errors; this keeps the simplex well scaled across regressors
    mean_scale = np.ones(k_mean)
    if k_mean:
        se = res.bse
        mean_scale = np.where(se > 0, se, np.maximum(np.abs(mean0), 1.0) * 1e-3)

    def unpack(u):
        v = u.copy()
        v[:k_mean] = mean0 + u[:k_mean] * mean_scale
        return _to_natural(v, spec)

    def pack(params):
        u = _to_unconstrained(params, spec)
        u[:k_mean] = (u[:k_mean] - mean0) / mean_scale
        return u

    def objective(u):
        params = unpack(u)
        eps = y - X @ params.mean
        with np.errstate(all="ignore"):
            h = _variance_path(spec, params, eps, h0)
            val = -np.mean(_loglik_terms(eps, h))
        return val if np.isfinite(val) else 1e10

    rng = np.random.default_rng(seed)
    u0 = pack(_start_values(spec, mean0, h0))
    best = None
    for attempt in range(restarts + 1):
        start = u0 if attempt == 0 else u0 + rng.normal(scale=0.5, size=u0.shape)
        with np.errstate(over="ignore", invalid="ignore"):
            warm = optimize.minimize(objective, start, method="Nelder-Mead",
                                     options={"maxiter": 300 * u0.size, "xatol": 1e-6, "fatol": 1e-10})
            polish = optimize.minimize(objective, warm.x, method="BFGS", options={"gtol": 1e-6})
        cand = polish if polish.fun <= warm.fun else warm
        grad_ok = polish.success or np.max(np.abs(getattr(polish, "jac", np.inf))) < 1e-4
        ok = np.isfinite(cand.fun) and cand.fun < 1e10 and grad_ok
        if best is None or cand.fun < best[0].fun:
            best = (cand, ok)
        if ok:
            break
    result, converged = best
    if not (np.isfinite(result.fun) and result.fun < 1e10):
        raise ConvergenceError("likelihood maximisation failed after all restarts")

    params = unpack(result.x)
    eps = y - X @ params.mean
    h = _variance_path(spec, params, eps, h0)
    loglik = float(np.sum(_loglik_terms(eps, h)))

    theta = params.vector(spec.family)

    def negll(t):
        p = GarchParams.from_vector(t, spec)
        e = y - X @ p.mean
        with np.errstate(all="ignore"):
            hh = _variance_path(spec, p, e, h0)
            if np.any(~(hh > 0)):
                return np.inf
            return -float(np.sum(_loglik_terms(e, hh)))

    reliable = True
    with np.errstate(over="ignore", invalid="ignore"):
        H = _numerical_hessian(negll, theta)
    try:
        if not np.all(np.isfinite(H)):
            raise np.linalg.LinAlgError("non-finite Hessian")
        np.linalg.cholesky(H)
        cov = np.linalg.inv(H)
        se = np.sqrt(np.diag(cov))
    except np.linalg.LinAlgError:
        reliable = False
        with np.errstate(invalid="ignore"):
            cov = np.linalg.pinv(np.where(np.isfinite(H), H, 0.0))
            d = np.diag(cov)
            se = np.where(d > 0, np.sqrt(np.abs(d)), np.nan)

    k = theta.shape[0]
    aic, sic, hqc = information_criteria(loglik, k, n)
    r2, adj = _r2(y, X @ params.mean, len(spec.regressors)) if np.ptp(y) > 0 else (float("nan"), float("nan"))
    return GarchFit(
        spec=spec,
        params=params,
        h=h,
        resid=eps,
        std_resid=eps / np.sqrt(h),
        loglik=loglik,
        nobs=n,
        h0=h0,
        aic=aic,
        sic=sic,
        hqc=hqc,
        r2=r2,
        adj_r2=adj,
        std_errors=se,
        converged=bool(converged),
        inference_reliable=reliable,
        dates=dates,
        fitted_mean=X @ params.mean,
    )


def _future_design(spec: GarchSpec, future_rows, horizon: int) -> np.ndarray:
    if spec.regressors:
        if future_rows is None:
            raise KeyError(f"future rows must supply regressors {list(spec.regressors)}")
        if isinstance(future_rows, (TimeSeriesFrame, dict)) or hasattr(future_rows, "columns"):
            missing = [r for r in spec.regressors if r not in future_rows]
            if missing:
                raise KeyError(f"missing regressor(s): {missing}")
            R = np.column_stack([np.asarray(future_rows[r], dtype=float) for r in spec.regressors])
        else:
            R = np.asarray(future_rows, dtype=float).reshape(-1, len(spec.regressors))
        if R.shape[0] < horizon:
            raise ValueError(f"future rows cover {R.shape[0]} steps, need {horizon}")
        R = R[:horizon]
    else:
        R = np.empty((horizon, 0))
    if spec.intercept:
        R = np.column_stack([np.ones(horizon), R])
    return R


def forecast(fit: GarchFit, future_rows=None, horizon: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Mean and conditional-variance forecasts for ``horizon`` steps.

    The mean is ``c + x' b`` on the supplied future regressor rows.  The
    variance iterates the recursion with unknown future shocks replaced by
    their expectations: ``E[e^2] = h`` (GARCH); ``E|z| = sqrt(2/pi)`` and
    ``E[z] = 0`` (EGARCH, so the EGARCH path is exp of the expected log-variance).
    """
    spec, par = fit.spec, fit.params
    mean = _future_design(spec, future_rows, horizon) @ par.mean
    p, q = spec.p, spec.q
    h_hist = list(fit.h)
    if spec.family == "GARCH":
        e2 = list(fit.resid**2)
        out = np.empty(horizon)
        for j in range(horizon):
            v = par.omega
            for i in range(1, q + 1):
                v += par.alpha[i - 1] * (e2[-i] if len(e2) >= i else fit.h0)
            for b in range(1, p + 1):
                v += par.beta[b - 1] * (h_hist[-b] if len(h_hist) >= b else fit.h0)
            out[j] = v
            h_hist.append(v)
            e2.append(v)
        return mean, out

    abs_z = list(np.abs(fit.std_resid))
    lev = list(fit.resid / fit.h if spec.literal_leverage else fit.std_resid)
    logh = list(np.log(fit.h))
    out = np.empty(horizon)
    for j in range(horizon):
        v = par.omega
        for b in range(1, p + 1):
            v += par.beta[b - 1] * (logh[-b] if len(logh) >= b else math.log(fit.h0))
        for i in range(1, q + 1):
            if len(abs_z) >= i:
                v += par.alpha[i - 1] * abs_z[-i] + par.gamma[i - 1] * lev[-i]
        v = min(max(v, -700.0), 700.0)
        out[j] = math.exp(v)
        logh.append(v)
        abs_z.append(_E_ABS_Z)
        lev.append(0.0)
    return mean, out


def static_mean_prediction(fit: GarchFit, frame: TimeSeriesFrame) -> tuple[np.ndarray, np.ndarray]:
    """One-step mean predictions ``c + x_t' b`` for every usable row of ``frame``.

    Returns ``(dates, predictions)`` in the target's level units: when the
    target is differenced the prediction is added to the previous observed
    level.
    """
    spec = fit.spec
    _, X, dates = _mean_data(spec, frame)
    pred = X @ fit.params.mean
    if spec.target in spec.difference:
        pred = pred + np.asarray(frame[spec.target], dtype=float)[:-1]
    return dates, pred


def residual_diagnostics(fit: GarchFit, level: float = 0.05) -> tuple[DescriptiveStats, TestResult]:
    """Moments and Jarque-Bera test of the standardised residuals ``e_t / sqrt(h_t)``."""
    return describe(fit.std_resid), jarque_bera(fit.std_resid, level)
