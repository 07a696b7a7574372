"""Simulate a GARCH(1,1) return series, test it, then recover its parameters.

Run with ``python3 demos/volatility_and_tests.py``.
"""
import numpy as np

from fxforecast.dataio import TimeSeriesFrame
from fxforecast.simulate import business_dates, gen_garch
from fxforecast.stattests import adf_test, arch_lm_test, jarque_bera
from fxforecast.volatility import GarchParams, GarchSpec, fit, forecast

true = GarchParams(0.1, [0.1], [0.8])
e = gen_garch(true, 5000, seed=0)
frame = TimeSeriesFrame(business_dates(e.size), {"y": e})

# volatility clustering shows up as ARCH effects; the series itself has no unit root
for res in (jarque_bera(e), arch_lm_test(e, 5), adf_test(e, "c")):
    print(f"{res.test:>8}: stat {res.statistic:10.3f}  p {res.p_value:.4f}  {res.decision}")

f = fit(GarchSpec("GARCH", 1, 1, intercept=False), frame)
print(f"\nomega {f.params.omega:.4f}  alpha {f.params.alpha[0]:.4f}  beta {f.params.beta[0]:.4f}"
      f"  (true 0.1, 0.1, 0.8)")
print(f"log-likelihood {f.loglik:.2f}  AIC {f.aic:.4f}  SIC {f.sic:.4f}")

# standardized residuals should look like white noise again
z = f.std_resid
print(f"ARCH-LM on standardized residuals: p = {arch_lm_test(z, 5).p_value:.3f}")
_, h = forecast(f, horizon=250)
print(f"variance forecast h+1 {h[0]:.3f}, h+250 {h[-1]:.3f}, unconditional {0.1 / (1 - 0.9):.3f}")
