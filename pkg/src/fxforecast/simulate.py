"""Synthetic processes used as verification oracles and in the demos."""
from __future__ import annotations

import math

import numpy as np

from .dataio import TimeSeriesFrame
from .volatility import GarchParams

__all__ = [
    "business_dates",
    "gen_garch",
    "gen_egarch",
    "gen_random_walk",
    "gen_narx_process",
    "gen_fx_regime",
    "FX_COLUMNS",
]

FX_COLUMNS = ("FX4", "NIFTYR", "DJIAR", "HSR", "DR", "COP", "CV", "IV")


def business_dates(n: int, start: str = "2009-01-01") -> np.ndarray:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(n))


def gen_garch(params: GarchParams, n: int, seed: int = 0, burn: int = 500) -> np.ndarray:
    """Shocks ``e_t = z_t sqrt(h_t)``, ``z_t ~ N(0, 1)``, from a GARCH(p, q) recursion.

    The recursion starts at the unconditional variance and the first ``burn``
    draws are discarded.
    """
    params.validate("GARCH")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + burn)
    q, p = params.alpha.shape[0], params.beta.shape[0]
    h_bar = params.omega / (1.0 - params.persistence)
    e2 = [h_bar] * q
    h = [h_bar] * max(p, 1)
    out = np.empty(n + burn)
    for t in range(n + burn):
        ht = params.omega + sum(params.alpha[i] * e2[-1 - i] for i in range(q)) + sum(params.beta[j] * h[-1 - j] for j in range(p))
        out[t] = z[t] * math.sqrt(ht)
        e2.append(out[t] ** 2)
        h.append(ht)
    return out[burn:]


def gen_egarch(params: GarchParams, n: int, seed: int = 0, burn: int = 500) -> np.ndarray:
    """EGARCH(p, q) shocks with standardised leverage term, started at the stationary log-variance."""
    params.validate("EGARCH")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + burn)
    q, p = params.alpha.shape[0], params.beta.shape[0]
    lbar = (params.omega + params.alpha.sum() * math.sqrt(2.0 / math.pi)) / (1.0 - params.beta.sum())
    logh = [lbar] * max(p, 1)
    zs = [0.0] * q
    out = np.empty(n + burn)
    for t in range(n + burn):
        v = params.omega + sum(params.beta[j] * logh[-1 - j] for j in range(p))
        v += sum(params.alpha[i] * abs(zs[-1 - i]) + params.gamma[i] * zs[-1 - i] for i in range(q))
        out[t] = z[t] * math.exp(0.5 * v)
        logh.append(v)
        zs.append(z[t])
    return out[burn:]


def gen_random_walk(n: int, drift: float = 0.0, seed: int = 0) -> np.ndarray:
    """``y_t = y_{t-1} + drift + N(0, 1)`` with ``y_0 = 0``; returns ``y_1..y_n``."""
    rng = np.random.default_rng(seed)
    return np.cumsum(drift + rng.standard_normal(n))


def gen_narx_process(n: int, seed: int = 0, noise_sd: float = 0.01, u_low: float = -1.0, u_high: float = 1.0) -> TimeSeriesFrame:
    """``y_t = 0.5 y_{t-1} + tanh(u_{t-1}) + noise_sd * N(0, 1)`` with iid uniform ``u``.

    Starts from ``y_0 = 0`` and returns columns ``u`` and ``y`` on business dates.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(u_low, u_high, n)
    eps = rng.standard_normal(n)
    y = np.zeros(n)
    for t in range(1, n):
        y[t] = 0.5 * y[t - 1] + math.tanh(u[t - 1]) + noise_sd * eps[t]
    return TimeSeriesFrame(business_dates(n), {"u": u, "y": y})


def gen_fx_regime(n: int = 1783, seed: int = 0, slope: float = 0.98, noise_sd: float = 0.05) -> TimeSeriesFrame:
    """Synthetic stand-in for the exchange-rate data set.

    ``FX1 = 0.98 * FX4 + 1 + noise`` where ``FX4`` is a slowly mean-reverting
    level near 55; the other seven regressors mimic daily index/oil returns and
    two volatility indices.  Only ``FX4`` carries signal for ``FX1``.
    """
    rng = np.random.default_rng(seed)
    fx4 = np.empty(n)
    fx4[0] = 55.0
    for t in range(1, n):
        fx4[t] = fx4[t - 1] + 0.02 * (55.0 - fx4[t - 1]) + 0.35 * rng.standard_normal()
    cols = {"FX4": fx4}
    for name, scale in (("NIFTYR", 0.0128), ("DJIAR", 0.0104), ("HSR", 0.0136), ("DR", 0.0142), ("COP", 0.0219)):
        cols[name] = scale * rng.standard_t(5, n) / math.sqrt(5.0 / 3.0)
    for name, level in (("CV", 20.0), ("IV", 22.0)):
        v = np.empty(n)
        v[0] = level
        for t in range(1, n):
            v[t] = v[t - 1] + 0.05 * (level - v[t - 1]) + 1.0 * rng.standard_normal()
        cols[name] = np.maximum(v, 5.0)
    fx1 = slope * fx4 + 1.0 + noise_sd * rng.standard_normal(n)
    return TimeSeriesFrame(business_dates(n), {"FX1": fx1, **cols})
