import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import special, stats

from mlelt import ml_dist, prabhakar
from mlelt.errors import DomainError, NonConvergence
from mlelt.prabhakar import PrabhakarParams

TABLE7 = [(0.8, 1.4, 1.0), (0.5, 2.0, 3.0), (0.2, 1.8, 5.0)]


def _psi_beta(p, u):
    """Closed form for sigma > 1: Gamma(k) I_w(b, k), k = (sigma-1)/alpha, w = u^a/(1+u^a)."""
    k = (p.sigma - 1.0) / p.alpha
    x = u ** p.alpha
    return math.gamma(k) * special.betainc(p.b, k, x / (1.0 + x))


def _psi_mp(p, u):
    mp.mp.dps = 30
    a, g, s = mp.mpf(p.alpha), mp.mpf(p.gamma), mp.mpf(p.sigma)
    b = g + (1 - s) / a
    u = mp.mpf(u)
    return float(u ** (a * b) * mp.gamma(g) / mp.gamma(b + 1) * mp.hyp2f1(g, b, b + 1, -u ** a))


# --- parameters ---------------------------------------------------------------

@pytest.mark.parametrize("args", [
    (0.0, 1.0, 1.0), (1.1, 1.0, 1.0), (0.5, 0.9, 1.0), (0.5, 1.5, 1.0), (0.5, 1.2, 0.0),
])
def test_params_reject(args):
    with pytest.raises(DomainError):
        PrabhakarParams(*args)


def test_params_box_edge_rejected():
    with pytest.raises(DomainError):
        PrabhakarParams(0.5, 1.0 + 0.5 * 3.0, 3.0)


def test_derived_quantities():
    p = PrabhakarParams(0.5, 2.0, 3.0)
    assert p.b == pytest.approx(1.0)
    assert p.exponent == pytest.approx(0.5)
    assert p.atom == pytest.approx(math.exp(-math.gamma(2.0)))
    assert PrabhakarParams(0.6, 1.0, 2.0).atom == 0.0


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.05, 1.0), gamma=st.floats(0.05, 10.0), frac=st.floats(0.0, 0.999))
def test_box_invariants(alpha, gamma, frac):
    p = PrabhakarParams(alpha, 1.0 + alpha * gamma * frac, gamma)
    assert 0 < p.b <= gamma * (1 + 1e-12)
    assert 0 < p.exponent <= alpha * gamma * (1 + 1e-12)


# --- series function ----------------------------------------------------------

def test_series_exp():
    assert prabhakar.prabhakar_function(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-14)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.7])
def test_series_at_zero(sigma):
    assert prabhakar.prabhakar_function(0.3, sigma, 2.0, 0.0) == pytest.approx(1 / math.gamma(sigma), rel=1e-15)


def test_series_classical_ml():
    mp.mp.dps = 40
    ref = float(mp.nsum(lambda k: (-1) ** k / mp.gamma(mp.mpf(k) / 2 + 1), [0, 200]))
    assert ref == pytest.approx(math.e * math.erfc(1.0), rel=1e-15)
    assert prabhakar.prabhakar_function(0.5, 1.0, 1.0, -1.0) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("alpha, sigma, gamma, z", [(0.7, 1.3, 2.5, -3.0), (0.9, 2.0, 0.5, 4.0), (0.4, 1.0, 3.0, -0.5)])
def test_series_vs_mpmath(alpha, sigma, gamma, z):
    mp.mp.dps = 40
    a, s, g, zz = map(mp.mpf, (alpha, sigma, gamma, z))
    ref = mp.nsum(lambda k: mp.rf(g, k) * zz ** k / (mp.factorial(k) * mp.gamma(a * k + s)), [0, mp.inf])
    assert prabhakar.prabhakar_function(alpha, sigma, gamma, z) == pytest.approx(float(ref), rel=1e-10)


def test_series_term_cap():
    with pytest.raises(NonConvergence):
        prabhakar.prabhakar_function(0.5, 1.0, 1.0, 30.0, max_terms=20)


# --- Laplace exponent / transform ---------------------------------------------

def test_exponent_reduces_to_log():
    p = PrabhakarParams(0.5, 1.0, 1.0)
    assert prabhakar.laplace_exponent(p, 1.0) == pytest.approx(math.log(2), rel=1e-13)


def test_exponent_example_value():
    assert prabhakar.laplace_exponent(PrabhakarParams(0.5, 2.0, 3.0), 1.0) == pytest.approx(0.75, rel=1e-12)


def test_exponent_vanishes_at_origin():
    # Psi(u) ~ u^e / Gamma(b + 1) as u -> 0, with e = 0.4 here
    p = PrabhakarParams(0.8, 1.4, 1.0)
    for u in (1e-8, 1e-12):
        lead = u ** p.exponent * math.gamma(p.gamma) / math.gamma(p.b + 1)
        assert prabhakar.laplace_exponent(p, u) == pytest.approx(lead, rel=1e-3)
    assert prabhakar.laplace_exponent(p, 1e-12) < 1e-4


@pytest.mark.parametrize("triple", TABLE7)
def test_exponent_vs_oracles(triple):
    p = PrabhakarParams(*triple)
    u = np.array([1e-6, 0.01, 0.3, 1.0, 4.0, 100.0, 1e6])
    got = prabhakar.laplace_exponent(p, u)
    assert_allclose(got, [_psi_beta(p, v) for v in u], rtol=1e-9)
    assert_allclose(got, [_psi_mp(p, v) for v in u], rtol=1e-9)


@pytest.mark.parametrize("triple", TABLE7)
def test_exponent_increasing(triple):
    u = np.logspace(-6, 6, 80)
    psi = prabhakar.laplace_exponent(PrabhakarParams(*triple), u)
    assert np.all(psi > 0) and np.all(np.diff(psi) > 0)


def test_exponent_domain():
    with pytest.raises(DomainError):
        prabhakar.laplace_exponent(PrabhakarParams(0.5, 1.0, 1.0), 0.0)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_reduction_gate(alpha):
    s = np.array([0.1, 0.5, 1, 2, 5, 10])
    got = prabhakar.lt(PrabhakarParams(alpha, 1.0, 1.0), s)
    assert np.max(np.abs(got - 1 / (1 + s ** alpha))) < 1e-8


@pytest.mark.parametrize("triple", TABLE7)
def test_lt_range_and_decreasing(triple):
    p = PrabhakarParams(*triple)
    assert prabhakar.lt(p, 0.0) == 1.0
    s = np.linspace(0.1, 10, 40)
    v = prabhakar.lt(p, s)
    assert np.all((v > 0) & (v <= 1)) and np.all(np.diff(v) < 0)


@pytest.mark.parametrize("triple", TABLE7)
def test_lt_limit_is_atom(triple):
    p = PrabhakarParams(*triple)
    assert prabhakar.lt(p, 1e30) == pytest.approx(p.atom, rel=1e-3, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.1, 1.0), gamma=st.floats(0.2, 6.0), frac=st.floats(0.01, 0.95),
       u=st.floats(1e-3, 1e3))
def test_exponent_matches_beta_form(alpha, gamma, frac, u):
    p = PrabhakarParams(alpha, 1.0 + alpha * gamma * frac, gamma)
    assume((p.sigma - 1) / alpha > 0.05)
    assert prabhakar.laplace_exponent(p, u) == pytest.approx(_psi_beta(p, u), rel=1e-8)


# --- sampler ------------------------------------------------------------------

def test_sample_reduction_ks():
    x = prabhakar.sample(PrabhakarParams(0.7, 1.0, 1.0), 10_000, seed=1)
    y = ml_dist.sample(ml_dist.MLParams(0.7), 10_000, seed=2)
    assert stats.ks_2samp(x, y).pvalue > 0.01


def test_sample_lt_agreement():
    p = PrabhakarParams(0.8, 1.4, 1.0)
    x = prabhakar.sample(p, 100_000, seed=3)
    s = np.logspace(-1, 1, 10)
    emp = np.exp(-np.outer(s, x)).mean(axis=1)
    assert np.max(np.abs(emp - prabhakar.lt(p, s))) < 0.01


def test_sample_single_and_deterministic():
    p = PrabhakarParams(0.5, 2.0, 3.0)
    one = prabhakar.sample(p, 1, seed=5)
    assert one.shape == (1,) and one[0] > 0 and np.isfinite(one[0])
    assert_array_equal(prabhakar.sample(p, 50, seed=6), prabhakar.sample(p, 50, seed=6))


def test_sample_atom_frequency():
    p = PrabhakarParams(0.5, 2.0, 3.0)
    x = prabhakar.sample(p, 20_000, seed=7)
    frac = np.mean(x < 1e-8)
    assert abs(frac - p.atom) < 4 * math.sqrt(p.atom * (1 - p.atom) / x.size)
