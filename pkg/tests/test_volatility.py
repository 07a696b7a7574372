import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from fxforecast.dataio import TimeSeriesFrame, ZeroVarianceError
from fxforecast.simulate import business_dates, gen_egarch, gen_garch
from fxforecast.stattests import arch_lm_test
from fxforecast.volatility import (
    GarchParams,
    GarchSpec,
    _to_natural,
    _to_unconstrained,
    egarch_filter,
    fit,
    fit_statistics,
    forecast,
    garch_filter,
    gaussian_loglik,
    information_criteria,
    residual_diagnostics,
    static_mean_prediction,
)

ZERO_MEAN = GarchSpec("GARCH", 1, 1, intercept=False)


def _frame(**cols):
    n = len(next(iter(cols.values())))
    return TimeSeriesFrame(business_dates(n), cols)


@pytest.fixture(scope="module")
def garch_fit():
    e = gen_garch(GarchParams(0.1, [0.1], [0.8]), 5000, seed=1)
    return fit(ZERO_MEAN, _frame(y=e))


@pytest.fixture(scope="module")
def regression_fit():
    rng = np.random.default_rng(2)
    x = rng.normal(size=600)
    e = gen_garch(GarchParams(0.05, [0.1], [0.85]), 600, seed=2)
    frame = _frame(y=1.0 + 0.98 * x + e, x=x)
    return frame, fit(GarchSpec("GARCH", 1, 1, regressors=("x",)), frame)


# ---- spec and params


def test_spec_validation_and_names():
    with pytest.raises(ValueError):
        GarchSpec("TARCH")
    with pytest.raises(ValueError):
        GarchSpec("GARCH", 1, 0)
    spec = GarchSpec("egarch", 1, 1, regressors=("x",))
    assert spec.family == "EGARCH" and spec.name == "EGARCH(1,1)"
    assert spec.param_names == ["const", "x", "omega", "alpha[1]", "gamma[1]", "beta[1]"]


def test_params_validation():
    with pytest.raises(ValueError):
        GarchParams(0.1, [0.5], [0.6]).validate("GARCH")
    with pytest.raises(ValueError):
        GarchParams(0.0, [0.1], [0.1]).validate("GARCH")
    with pytest.raises(ValueError):
        GarchParams(0.1, [-0.1], [0.1]).validate("GARCH")
    GarchParams(-1.0, [-0.2], [-0.5], [0.3]).validate("EGARCH")


def test_params_vector_roundtrip():
    spec = GarchSpec("EGARCH", 2, 1, regressors=("x",))
    theta = np.array([0.5, 0.9, -0.1, 0.2, -0.05, 0.6, 0.2])
    assert_array_equal(GarchParams.from_vector(theta, spec).vector("EGARCH"), theta)


@pytest.mark.parametrize("family,p,q", [("GARCH", 1, 1), ("GARCH", 2, 2), ("EGARCH", 1, 1), ("EGARCH", 2, 2)])
def test_transform_roundtrip(family, p, q):
    spec = GarchSpec(family, p, q, regressors=("x",))
    if family == "GARCH":
        par = GarchParams(0.2, np.full(q, 0.05), np.full(p, 0.4), mean=[0.1, 0.9])
    else:
        par = GarchParams(-0.3, np.full(q, 0.1), [0.5, 0.2][:p], np.full(q, -0.1), [0.1, 0.9])
    back = _to_natural(_to_unconstrained(par, spec), spec)
    assert_allclose(back.vector(family), par.vector(family), rtol=1e-9, atol=1e-12)


@given(st.lists(st.floats(-30, 30), min_size=4, max_size=4))
@settings(max_examples=100, deadline=None)
def test_garch_transform_stays_stationary(u):
    spec = GarchSpec("GARCH", 2, 1, intercept=False)
    par = _to_natural(np.array(u), spec)
    assert par.omega > 0
    assert np.all(par.alpha >= 0) and np.all(par.beta >= 0)
    assert par.persistence < 1 - 1e-7


# ---- filters


def test_garch_constant_variance():
    h = garch_filter(GarchParams(0.2, [0.0], [0.0]), np.random.default_rng(0).normal(size=20), 1.0)
    assert_array_equal(h, 0.2)


def test_garch_hand_step():
    h = garch_filter(GarchParams(0.1, [0.2], [0.7]), np.array([1.0, 0.5]), 1.0)
    # h_1 uses the pre-sample seed h0 = 1 for both e^2 and h
    assert h[0] == pytest.approx(1.0, abs=1e-15)
    assert h[1] == pytest.approx(0.1 + 0.2 * 1.0 + 0.7 * 1.0, abs=1e-15)


def test_garch_higher_order_matches_loop(rng):
    par = GarchParams(0.05, [0.05, 0.1], [0.3, 0.4])
    e = rng.normal(size=50)
    h = garch_filter(par, e, 0.7)
    e2, hh = [0.7, 0.7], [0.7, 0.7]
    for t in range(50):
        v = 0.05 + 0.05 * e2[-1] + 0.1 * e2[-2] + 0.3 * hh[-1] + 0.4 * hh[-2]
        hh.append(v)
        e2.append(e[t] ** 2)
    assert_allclose(h, hh[2:], rtol=1e-14)


def test_garch_unconditional_mean():
    par = GarchParams(0.05, [0.1], [0.85])
    e = gen_garch(par, 100_000, seed=3)
    h = garch_filter(par, e, 1.0)
    assert abs(h.mean() - 1.0) < 0.05


def test_filter_rejects_bad_h0():
    with pytest.raises(ValueError):
        garch_filter(GarchParams(0.1, [0.1], [0.1]), np.zeros(3), 0.0)
    with pytest.raises(ValueError):
        egarch_filter(GarchParams(0.1, [0.1], [0.1], [0.0]), np.zeros(3), -1.0)


def test_egarch_constant_case(rng):
    h = egarch_filter(GarchParams(0.3, [0.0], [0.0], [0.0]), rng.normal(size=10), 2.0)
    assert_allclose(h, math.exp(0.3), rtol=1e-15)


def test_egarch_hand_leverage():
    par = GarchParams(0.0, [0.1], [0.0], [-0.1])
    neg = egarch_filter(par, np.array([-1.0, 0.0]), 1.0)
    pos = egarch_filter(par, np.array([1.0, 0.0]), 1.0)
    assert neg[0] == pos[0] == 1.0
    assert math.log(neg[1]) == pytest.approx(0.2, abs=1e-15)
    assert math.log(pos[1]) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0.01, 5.0), st.floats(-0.5, -0.01), st.floats(0.0, 0.5), st.floats(-0.9, 0.9), st.floats(0.1, 5.0))
@settings(max_examples=100, deadline=None)
def test_egarch_news_impact_asymmetry(m, gamma, alpha, beta, h0):
    par = GarchParams(-0.2, [alpha], [beta], [gamma])
    h1 = egarch_filter(par, np.array([0.0]), h0)[0]
    shock = m * math.sqrt(h1)
    lneg = math.log(egarch_filter(par, np.array([-shock, 0.0]), h0)[1])
    lpos = math.log(egarch_filter(par, np.array([shock, 0.0]), h0)[1])
    assert lneg > lpos
    assert lneg - lpos == pytest.approx(2 * abs(gamma) * m, rel=1e-12, abs=1e-14)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.floats(-50, 50), st.floats(-5, 5),
       st.floats(-5, 5), st.floats(-0.999, 0.999), st.booleans())
@settings(max_examples=200, deadline=None)
def test_egarch_positivity(eps, omega, alpha, gamma, beta, literal):
    h = egarch_filter(GarchParams(omega, [alpha], [beta], [gamma]), np.array(eps), 1.0, literal)
    assert np.all(h > 0) and np.all(np.isfinite(h))


@given(st.integers(0, 1000), st.floats(0.01, 10.0))
@settings(max_examples=50, deadline=None)
def test_garch_omega_linearity(seed, omega):
    e = np.random.default_rng(seed).normal(size=25)
    h1 = garch_filter(GarchParams(omega, [0.0], [0.0]), e, 1.0)
    h2 = garch_filter(GarchParams(2 * omega, [0.0], [0.0]), e, 1.0)
    assert_allclose(h2, 2 * h1, rtol=1e-15)


@given(st.integers(0, 1000), st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_garch_scale_equivariance(seed, s):
    par = GarchParams(0.1, [0.1], [0.8])
    e = gen_garch(par, 200, seed=seed)
    h = garch_filter(par, e, 1.3)
    hs = garch_filter(GarchParams(0.1 * s**2, [0.1], [0.8]), s * e, 1.3 * s**2)
    assert_allclose(hs, s**2 * h, rtol=1e-12)
    ll = gaussian_loglik(ZERO_MEAN, par, _frame(y=e))
    lls = gaussian_loglik(ZERO_MEAN, GarchParams(0.1 * s**2, [0.1], [0.8]), _frame(y=s * e))
    assert lls - ll == pytest.approx(-200 * math.log(s), rel=1e-10, abs=1e-8)


# ---- likelihood


def test_loglik_standard_normal_at_zero():
    ll = gaussian_loglik(ZERO_MEAN, GarchParams(1.0, [0.0], [0.0]), _frame(y=np.zeros(7)), h0=1.0)
    assert ll == pytest.approx(-3.5 * math.log(2 * math.pi), rel=1e-15)


def test_loglik_hand_value():
    ll = gaussian_loglik(ZERO_MEAN, GarchParams(2.0, [0.0], [0.0]), _frame(y=np.array([1.0, 1.0])), h0=2.0)
    assert ll == pytest.approx(-(math.log(2 * math.pi) + math.log(2) + 0.5), rel=1e-15)


def test_loglik_density_oracle(rng):
    spec = GarchSpec("EGARCH", 1, 1, regressors=("x",))
    x = rng.normal(size=80)
    frame = _frame(y=0.3 + 0.5 * x + rng.normal(size=80), x=x)
    par = GarchParams(-0.1, [0.2], [0.6], [-0.05], [0.3, 0.5])
    eps = np.asarray(frame["y"]) - 0.3 - 0.5 * x
    h = egarch_filter(par, eps, 1.0)
    oracle = stats.norm.logpdf(eps, scale=np.sqrt(h)).sum()
    assert gaussian_loglik(spec, par, frame, h0=1.0) == pytest.approx(oracle, rel=1e-12)


def test_loglik_wrong_mean_length():
    with pytest.raises(ValueError):
        gaussian_loglik(GarchSpec(), GarchParams(1.0, [0.0], [0.0]), _frame(y=np.ones(5)))


# ---- information criteria


def test_information_criteria_hand():
    aic, sic, hqc = information_criteria(100.0, 5, 1000)
    assert aic == pytest.approx(-0.19, abs=1e-15)
    assert sic == pytest.approx((-200 + 5 * math.log(1000)) / 1000, rel=1e-15)
    assert hqc == pytest.approx((-200 + 10 * math.log(math.log(1000))) / 1000, rel=1e-15)
    total = information_criteria(100.0, 5, 1000, per_observation=False)
    assert_allclose(total, np.array([aic, sic, hqc]) * 1000, rtol=1e-15)


@given(st.floats(-1e4, 1e4), st.integers(1, 20), st.integers(25, 10_000))
@settings(max_examples=100, deadline=None)
def test_information_criteria_penalty_monotone(ll, k, n):
    a = information_criteria(ll, k, n)
    b = information_criteria(ll, k + 1, n)
    assert all(y > x for x, y in zip(a, b))
    # SIC penalises more than AIC once log n > 2
    assert (a[1] > a[0]) == (math.log(n) > 2)


def test_information_criteria_errors():
    with pytest.raises(ValueError):
        information_criteria(0.0, 5, 5)
    with pytest.raises(ValueError):
        information_criteria(0.0, 0, 5)


# ---- fitting


def test_fit_recovers_parameters():
    errs = []
    for seed in range(20):
        e = gen_garch(GarchParams(0.1, [0.1], [0.8]), 5000, seed=100 + seed)
        f = fit(ZERO_MEAN, _frame(y=e))
        assert f.params.persistence < 1
        errs.append([abs(f.params.omega - 0.1), abs(f.params.alpha[0] - 0.1), abs(f.params.beta[0] - 0.8)])
    med = np.median(errs, axis=0)
    assert med[0] < 0.05 and med[1] < 0.04 and med[2] < 0.06


def test_fit_no_spurious_arch():
    small = 0
    for seed in range(20):
        e = np.random.default_rng(200 + seed).standard_normal(2000)
        small += fit(ZERO_MEAN, _frame(y=e)).params.alpha[0] <= 0.05
    assert small >= 18


def test_fit_invariants(garch_fit):
    f = garch_fit
    assert np.all(f.h > 0)
    assert f.resid.shape == f.h.shape == (f.nobs,)
    assert_allclose(np.abs(f.zstats), np.abs(f.coefficients) / f.std_errors, rtol=1e-15)
    assert_allclose(f.pvalues, 2 * stats.norm.sf(np.abs(f.zstats)), rtol=1e-12)
    assert f.converged and f.inference_reliable


def test_fit_is_local_maximum(garch_fit):
    f = garch_fit
    frame = _frame(y=f.resid)
    u = _to_unconstrained(f.params, f.spec)
    ll0 = gaussian_loglik(f.spec, f.params, frame, h0=f.h0)
    assert ll0 == pytest.approx(f.loglik, rel=1e-12)
    for k in range(u.size):
        for sign in (-1, 1):
            v = u.copy()
            v[k] += sign * 0.01 * max(abs(u[k]), 1e-3)
            assert gaussian_loglik(f.spec, _to_natural(v, f.spec), frame, h0=f.h0) <= ll0 + 1e-6


def test_fit_json_layout(regression_fit):
    _, f = regression_fit
    d = json.loads(f.to_json())
    for key in ("family", "p", "q", "coefficients", "loglik", "aic", "sic", "hqc", "r2", "adj_r2"):
        assert key in d
    assert [c["name"] for c in d["coefficients"]] == ["const", "x", "omega", "alpha[1]", "beta[1]"]
    assert set(d["coefficients"][0]) == {"name", "estimate", "std_error", "z", "p_value", "stars"}
    assert d["coefficients"][1]["estimate"] == pytest.approx(0.98, abs=0.05)


def test_fit_is_deterministic(regression_fit):
    frame, f = regression_fit
    assert f.to_json() == fit(f.spec, frame).to_json()


def test_fit_errors():
    with pytest.raises(ValueError):
        fit(ZERO_MEAN, _frame(y=np.random.default_rng(0).normal(size=20)))
    with pytest.raises(ZeroVarianceError):
        fit(ZERO_MEAN, _frame(y=np.zeros(50)))
    with pytest.raises(KeyError):
        fit(GarchSpec(regressors=("x",)), _frame(y=np.ones(50)))


@pytest.mark.parametrize("p,q", [(1, 1), (2, 2)])
def test_egarch_fit_runs(p, q):
    e = gen_egarch(GarchParams(-0.1, [0.15], [0.95], [-0.1]), 3000, seed=4)
    f = fit(GarchSpec("EGARCH", p, q, intercept=False), _frame(y=e))
    assert np.all(f.h > 0)
    assert f.params.gamma[0] < 0
    assert np.all(np.abs(np.roots(np.r_[1.0, -f.params.beta])) < 1)


def test_differenced_target(rng):
    level = np.cumsum(rng.normal(size=300)) + 50
    x = rng.normal(size=300)
    frame = _frame(y=level, x=x)
    spec = GarchSpec(regressors=("x",), difference=("y",))
    f = fit(spec, frame)
    assert f.nobs == 299
    dates, pred = static_mean_prediction(f, frame)
    assert_array_equal(dates, frame.dates[1:])
    assert_allclose(pred, level[:-1] + f.params.mean[0] + f.params.mean[1] * x[1:], rtol=1e-14)


# ---- fit statistics


def test_fit_statistics_hand_three_points(regression_fit):
    _, f = regression_fit
    frame = _frame(y=np.array([1.0, 3.0, 2.0]), x=np.array([0.0, 1.0, 2.0]))
    A = np.column_stack([np.ones(3), [0.0, 1.0, 2.0]])
    beta = np.linalg.solve(A.T @ A, A.T @ [1.0, 3.0, 2.0])
    g = dataclasses.replace(f, params=dataclasses.replace(f.params, mean=beta))
    r2, adj = fit_statistics(g, frame)
    # y = 1.5 + 0.5 x: SSR = 1.5, SST = 2
    assert r2 == pytest.approx(0.25, abs=1e-14)
    assert adj == pytest.approx(1 - 0.75 * 2 / 1, abs=1e-14)


def test_fit_statistics_perfect_and_intercept_only(regression_fit):
    _, f = regression_fit
    x = np.linspace(0, 1, 10)
    perfect = dataclasses.replace(f, params=dataclasses.replace(f.params, mean=np.array([1.0, 2.0])))
    assert fit_statistics(perfect, _frame(y=1 + 2 * x, x=x))[0] == pytest.approx(1.0, abs=1e-15)
    y = np.sin(np.arange(10.0))
    flat = dataclasses.replace(f, params=dataclasses.replace(f.params, mean=np.array([y.mean(), 0.0])))
    assert fit_statistics(flat, _frame(y=y, x=x))[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ZeroVarianceError):
        fit_statistics(flat, _frame(y=np.ones(10), x=x))


# ---- forecasting and diagnostics


def test_forecast_one_step_is_filter_step(regression_fit):
    _, f = regression_fit
    mean, var = forecast(f, {"x": [0.5]}, 1)
    par = f.params
    assert var[0] == pytest.approx(par.omega + par.alpha[0] * f.resid[-1] ** 2 + par.beta[0] * f.h[-1], rel=1e-14)
    assert mean[0] == pytest.approx(par.mean[0] + 0.5 * par.mean[1], rel=1e-14)


def test_forecast_long_horizon_converges(garch_fit):
    _, var = forecast(garch_fit, horizon=2000)
    par = garch_fit.params
    assert var[-1] == pytest.approx(par.omega / (1 - par.persistence), rel=1e-8)
    assert np.all(var > 0)


def test_forecast_missing_regressor(regression_fit):
    _, f = regression_fit
    with pytest.raises(KeyError):
        forecast(f, {"z": [1.0]}, 1)
    with pytest.raises(KeyError):
        forecast(f, None, 1)


def test_egarch_forecast_symmetric_without_leverage(garch_fit):
    spec = GarchSpec("EGARCH", 1, 1, intercept=False)
    par = GarchParams(-0.1, [0.1], [0.9], [0.0])
    base = dataclasses.replace(garch_fit, spec=spec, params=par)
    flipped = dataclasses.replace(base, resid=-base.resid, std_resid=-base.std_resid)
    assert_array_equal(forecast(base, horizon=5)[1], forecast(flipped, horizon=5)[1])
    assert np.all(forecast(base, horizon=5)[1] > 0)


def test_residual_diagnostics_well_specified(garch_fit):
    desc, jb = residual_diagnostics(garch_fit)
    assert abs(desc.kurtosis - 3) < 0.3
    assert jb.test == "jarque_bera"


def test_standardised_residuals_of_iid_fit():
    e = np.random.default_rng(5).standard_normal(5000)
    f = fit(ZERO_MEAN, _frame(y=e))
    assert abs(f.std_resid.mean()) < 0.05
    assert abs(f.std_resid.std() - 1) < 0.05


def test_no_remaining_arch_in_standardised_residuals():
    keep = 0
    for seed in range(20):
        e = gen_garch(GarchParams(0.1, [0.1], [0.8]), 5000, seed=300 + seed)
        keep += not arch_lm_test(fit(ZERO_MEAN, _frame(y=e)).std_resid, 5).reject
    assert keep >= 18
