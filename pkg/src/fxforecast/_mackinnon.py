"""
Dickey-Fuller tau distribution: response-surface p-values and critical values.

Coefficients for a single I(1) series.  The p-value surface is
MacKinnon (1994), "Approximate Asymptotic Distribution Functions for Unit-Root
and Cointegration Tests", JBES 12(2); critical values are MacKinnon (2010),
"Critical Values for Cointegration Tests", Queen's Economics WP 1227.
"""
import numpy as np
from scipy.stats import norm

# left-tail cut-off and clipping bounds for the tau statistic
TAU_STAR = {"n": -1.04, "c": -1.61, "ct": -2.89}
TAU_MIN = {"n": -19.04, "c": -18.83, "ct": -16.18}
TAU_MAX = {"n": np.inf, "c": 2.74, "ct": 0.7}

# polynomial coefficients in ascending powers of tau
TAU_SMALLP = {
    "n": (0.6344, 1.2378, 3.2496e-2),
    "c": (2.1659, 1.4412, 3.8269e-2),
    "ct": (3.2512, 1.6047, 4.9588e-2),
}
TAU_LARGEP = {
    "n": (0.4797, 0.93557, -0.06999, 0.033066),
    "c": (1.7339, 0.93202, -0.12745, -0.010368),
    "ct": (2.5261, 0.61654, -0.37956, -0.060285),
}

# rows: 1%, 5%, 10%; columns: coefficients on 1, 1/T, 1/T^2, 1/T^3
TAU_2010 = {
    "n": np.array([
        [-2.56574, -2.2358, -3.627, 0.0],
        [-1.94100, -0.2686, -3.365, 31.223],
        [-1.61682, 0.2656, -2.714, 25.364],
    ]),
    "c": np.array([
        [-3.43035, -6.5393, -16.786, -79.433],
        [-2.86154, -2.8903, -4.234, -40.040],
        [-2.56677, -1.5384, -2.809, 0.0],
    ]),
    "ct": np.array([
        [-3.95877, -9.0531, -28.428, -134.155],
        [-3.41049, -4.3904, -9.036, -45.374],
        [-3.12705, -2.5856, -3.925, -22.380],
    ]),
}


def tau_pvalue(stat: float, trend: str) -> float:
    """Approximate left-tail p-value of a Dickey-Fuller t statistic."""
    if stat > TAU_MAX[trend]:
        return 1.0
    if stat < TAU_MIN[trend]:
        return 0.0
    coef = TAU_SMALLP[trend] if stat <= TAU_STAR[trend] else TAU_LARGEP[trend]
    return float(norm.cdf(np.polynomial.polynomial.polyval(stat, coef)))


def tau_critical_values(trend: str, nobs: float = np.inf) -> dict[str, float]:
    table = TAU_2010[trend]
    if np.isinf(nobs):
        vals = table[:, 0]
    else:
        inv = 1.0 / nobs
        vals = table @ np.array([1.0, inv, inv**2, inv**3])
    return {"1%": float(vals[0]), "5%": float(vals[1]), "10%": float(vals[2])}
