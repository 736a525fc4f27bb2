"""End-to-end acceptance checks, one test per numbered criterion.

Each test attaches a one-line summary; the conftest prints PASS/FAIL per
criterion at the end of the session. Monte-Carlo criteria are marked slow.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from mlelt import ar1, estimation, ml_dist, prabhakar
from mlelt.cli import survival_table
from mlelt.lt_inversion import cdf_from_lt, quantile_from_lt

ML_TRUTHS = [(0.3, 4.0), (0.5, 4.0), (0.7, 10.0), (0.9, 10.0)]
# reference RMSE for (alpha, sigma) per truth pair
ML_RMSE = [(0.0126, 0.7625), (0.0154, 0.4134), (0.0183, 0.6681), (0.0198, 0.4583)]
PRAB_TRUTHS = [(0.8, 1.4, 1.0), (0.5, 2.0, 3.0), (0.2, 1.8, 5.0)]
AR_TRUTHS = [(0.4, 0.4), (0.6, 0.8)]
# reference RMSE for (alpha, rho) per truth pair
AR_RMSE = [(0.0319, 0.0492), (0.0600, 0.0331)]


def _within_factor(got, ref, k=2.0):
    return ref / k <= got <= ref * k


@pytest.mark.criterion(1)
def test_c01_sampler_transform_agreement(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for alpha, sigma in ML_TRUTHS:
        p = ml_dist.MLParams(alpha, sigma)
        x = ml_dist.sample(p, 100_000, seed=1)
        s = estimation.default_grid(x).points
        worst = max(worst, float(np.max(np.abs(estimation.empirical_lt(x, s) - ml_dist.lt(p, s)))))
    dt = time.perf_counter() - t0
    criterion(f"max |emp LT - LT| = {worst:.4f} (< 0.01), {dt:.1f} s (< 10 s)")
    assert worst < 0.01 and dt < 10


@pytest.mark.criterion(2)
def test_c02_density_cdf_consistency(criterion):
    t0 = time.perf_counter()
    mass_err, deriv_err = 0.0, 0.0
    lo, hi = -40.0, 40.0
    for alpha in (0.3, 0.5, 0.7, 0.9):
        p = ml_dist.MLParams(alpha)
        body = integrate.quad(lambda w: math.exp(w) * ml_dist.pdf(p, math.exp(w)), lo, hi,
                              limit=400, epsabs=1e-10, epsrel=1e-9)[0]
        ends = math.exp(lo * alpha) / math.gamma(1 + alpha) + math.exp(-hi * alpha) / math.gamma(1 - alpha)
        mass_err = max(mass_err, abs(body + ends - 1.0))
        for x in (0.5, 1.0, 2.0, 5.0):
            h = 1e-4 * x
            d = (ml_dist.cdf(p, x + h) - ml_dist.cdf(p, x - h)) / (2 * h)
            deriv_err = max(deriv_err, abs(d - ml_dist.pdf(p, x)))
    dt = time.perf_counter() - t0
    criterion(f"mass err {mass_err:.1e} (< 1e-6), cdf' err {deriv_err:.1e} (< 1e-4), {dt:.1f} s (< 5 s)")
    assert mass_err < 1e-6 and deriv_err < 1e-4 and dt < 5


@pytest.mark.slow
@pytest.mark.criterion(3)
def test_c03_ml_study(criterion):
    t0 = time.perf_counter()
    lines, ok = [], True
    for truth, ref in zip(ML_TRUTHS, ML_RMSE):
        r = estimation.monte_carlo_study("ml", truth, trials=100, length=1000, base_seed=42)
        good = (abs(r.mean_estimates[0] - truth[0]) <= 0.03
                and abs(r.mean_estimates[1] - truth[1]) <= 0.1 * truth[1]
                and all(_within_factor(g, e) for g, e in zip(r.rmse, ref)))
        ok &= good
        lines.append(f"{truth}: mean ({r.mean_estimates[0]:.4f}, {r.mean_estimates[1]:.3f}) "
                     f"rmse ({r.rmse[0]:.4f}, {r.rmse[1]:.3f})")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    criterion("; ".join(lines) + f"; {dt:.0f} s (< 300 s)")
    assert ok


@pytest.mark.criterion(4)
def test_c04_prabhakar_reduction_gate(criterion):
    s = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    worst = max(float(np.max(np.abs(prabhakar.lt(prabhakar.PrabhakarParams(a, 1.0, 1.0), s)
                                     - 1 / (1 + s ** a))))
                for a in (0.3, 0.6, 0.9))
    criterion(f"max gap {worst:.1e} (< 1e-8)")
    assert worst < 1e-8


@pytest.mark.criterion(5)
def test_c05_inversion_fidelity(criterion):
    p = ml_dist.MLParams(0.7)
    phi = lambda s: ml_dist.lt(p, s)  # noqa: E731
    x = np.linspace(0.1, 10, 100)
    cdf_err = float(np.max(np.abs(cdf_from_lt(phi, x) - ml_dist.cdf(p, x))))
    u = np.linspace(0.05, 0.95, 19)
    rt_err = max(abs(cdf_from_lt(phi, quantile_from_lt(phi, v)) - v) for v in u)
    criterion(f"cdf err {cdf_err:.1e} (< 1e-4), quantile roundtrip {rt_err:.1e} (< 1e-5)")
    assert cdf_err < 1e-4 and rt_err < 1e-5


@pytest.mark.slow
@pytest.mark.criterion(6)
def test_c06_prabhakar_study(criterion):
    t0 = time.perf_counter()
    lines, ok = [], True
    for truth in PRAB_TRUTHS:
        r = estimation.monte_carlo_study("prabhakar", truth, trials=20, length=1000, base_seed=42)
        d = np.abs(r.mean_estimates - np.asarray(truth))
        ok &= bool(d[0] <= 0.1 and d[1] <= 0.3 and d[2] <= 1.0)
        m = r.mean_estimates
        lines.append(f"{truth}: mean ({m[0]:.3f}, {m[1]:.3f}, {m[2]:.3f}) failed {r.failed}")
    dt = time.perf_counter() - t0
    ok &= dt < 1800
    criterion("; ".join(lines) + f"; {dt:.0f} s (< 1800 s)")
    assert ok


@pytest.mark.criterion(7)
def test_c07_innovation_law(criterion):
    mass_err = 0.0
    lo, hi = -35.0, 35.0
    for alpha, rho in [(0.4, 0.4), (0.6, 0.8)]:
        p = ar1.AR1Params(alpha, rho)
        body = integrate.quad(lambda w: math.exp(w) * ar1.innovation_pdf(p, math.exp(w)), lo, hi,
                              limit=400, epsabs=1e-10, epsrel=1e-9)[0]
        c = 1 - p.atom
        ends = c * (math.exp(lo * alpha) / math.gamma(1 + alpha) + math.exp(-hi * alpha) / math.gamma(1 - alpha))
        mass_err = max(mass_err, abs(body + ends - c))
    p = ar1.AR1Params(0.6, 0.8)
    n = 100_000
    frac = float(np.mean(ar1.sample_innovations(p, n, seed=42) == 0.0))
    z = abs(frac - p.atom) / math.sqrt(p.atom * (1 - p.atom) / n)
    s = np.logspace(-4, 4, 200)
    ident = 0.0
    for alpha, rho in [(0.4, 0.4), (0.6, 0.8), (0.3, 0.95)]:
        q = ar1.AR1Params(alpha, rho)
        lhs = 1 / (1 + s ** alpha)
        rhs = ar1.innovation_lt(q, s) / (1 + (rho * s) ** alpha)
        ident = max(ident, float(np.max(np.abs(lhs - rhs))))
    criterion(f"mass err {mass_err:.1e} (< 1e-6), atom z = {z:.2f} (< 3), identity {ident:.1e} (< 1e-14)")
    assert mass_err < 1e-6 and z < 3 and ident < 1e-14


@pytest.mark.slow
@pytest.mark.criterion(8)
def test_c08_ar1_study(criterion):
    t0 = time.perf_counter()
    lines, ok = [], True
    for truth, ref in zip(AR_TRUTHS, AR_RMSE):
        r = estimation.monte_carlo_study("ar1", truth, trials=50, length=1000, base_seed=42)
        means_ok = bool(np.all(np.abs(r.mean_estimates - np.asarray(truth)) <= 0.03))
        rmse_ok = [_within_factor(g, e) for g, e in zip(r.rmse, ref)]
        ok &= means_ok and all(rmse_ok)
        lines.append(f"{truth}: mean ({r.mean_estimates[0]:.4f}, {r.mean_estimates[1]:.4f}) "
                     f"rmse ({r.rmse[0]:.4f}, {r.rmse[1]:.1e}) vs ({ref[0]}, {ref[1]})")
    dt = time.perf_counter() - t0
    ok &= dt < 180
    criterion("; ".join(lines) + f"; {dt:.0f} s (< 180 s)")
    assert ok


@pytest.mark.criterion(9)
def test_c09_non_reversibility(criterion):
    grid = np.logspace(-1, 1, 10)
    gap = ar1.reversibility_gap(ar1.AR1Params(0.6, 0.8), grid)
    iid = ar1.reversibility_gap(ar1.AR1Params(0.6, 0.0), grid)
    criterion(f"gap {gap:.2e} (> 1e-3), iid gap {iid} (== 0)")
    assert gap > 1e-3 and iid == 0.0


@pytest.mark.criterion(10)
def test_c10_survival_substitute(criterion):
    x = ml_dist.sample(ml_dist.MLParams(0.65, 0.55), 10_000, seed=42)
    fit = estimation.fit_ml(x)
    pts, log_emp, _, log_exp = survival_table(x, fit)
    i = int(np.searchsorted(pts, np.quantile(x, 0.999)))
    gap = float(log_emp[i] - log_exp[i])
    a = float(fit.estimates[0])
    criterion(f"alpha {a:.4f} (0.65 +- 0.05), log-survival gap at q99.9 {gap:.1f} (> 1)")
    assert abs(a - 0.65) <= 0.05 and gap > 1
