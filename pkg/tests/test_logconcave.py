import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from callspace import algebra as al
from callspace import blackscholes as bs
from callspace import curvespace as cs
from callspace import logconcave as lc
from callspace.errors import NonConcaveInput, NotApplicable, NotConcave, UnknownFamily
from callspace.normal import norm_cdf, norm_pdf

STRICT = ("normal", "gumbel", "logistic")
KAPPAS = np.geomspace(0.05, 20, 25)


def test_builtin_examples():
    assert lc.builtin("gumbel").cdf(0.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert lc.builtin("normal").cdf(0.0) == 0.5
    assert lc.builtin("exponential").support == (0.0, math.inf)
    assert lc.builtin("uniform").support == (0.0, 1.0)


def test_builtin_parameters():
    n = lc.builtin("normal", {"mu": 1.0, "sigma": 2.0})
    assert n.cdf(1.0) == 0.5 and n.pdf(1.0) == pytest.approx(norm_pdf(0) / 2)
    assert lc.builtin("exponential", {"rate": 2.0}).sf(1.0) == pytest.approx(math.exp(-2))
    assert lc.builtin("uniform", {"a": -1, "b": 3}).support == (-1.0, 3.0)
    with pytest.raises(ValueError):
        lc.builtin("normal", {"rate": 1.0})


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        lc.builtin("cauchy")


@pytest.mark.parametrize("fam", lc.FAMILIES)
def test_density_invariants(fam):
    f = lc.builtin(fam, {"scale": 1.3}) if fam != "uniform" else lc.builtin(fam)
    L, R = f.support
    mass, _ = integrate.quad(f.pdf, L, R, epsabs=1e-13, limit=200, points=None
                             if not (math.isfinite(L) and math.isfinite(R)) else [0.5 * (L + R)])
    assert abs(mass - 1) < 1e-10
    lo = L + 1e-6 if math.isfinite(L) else -8
    hi = R - 1e-6 if math.isfinite(R) else 8
    zs = np.linspace(lo, hi, 301)
    lf = np.array([f.logpdf(z) for z in zs])
    assert np.all(lf[1:-1] >= 0.5 * (lf[:-2] + lf[2:]) - 1e-10)
    for p in np.linspace(0.001, 0.999, 101):
        assert abs(f.cdf(f.ppf(p)) - p) < 1e-10


@pytest.mark.parametrize("y", [0.1, 0.7, 2.0])
def test_normal_surface_is_black_scholes(y):
    f = lc.builtin("normal")
    for k in KAPPAS:
        assert abs(lc.surface_price(f, k, y) - bs.cbs(k, y)) < 1e-14


@pytest.mark.parametrize("fam", STRICT)
def test_threshold_and_quadrature_agree(fam):
    f = lc.builtin(fam)
    for y in (0.3, 1.5, -0.8):
        for k in KAPPAS[::3]:
            a = lc.surface_price(f, k, y, method="threshold")
            b = lc.surface_price(f, k, y, method="quadrature")
            assert abs(a - b) < 1e-9


@pytest.mark.parametrize("fam", lc.FAMILIES)
def test_price_at_zero_strike(fam):
    assert lc.surface_price(lc.builtin(fam), 0.0, 0.9) == 1.0


def test_gumbel_example():
    g = lc.builtin("gumbel")
    assert abs(lc.surface_price(g, 1, math.log(2)) - 0.25) < 1e-15
    assert abs(lc.surface_price(g, 1, math.log(2), method="quadrature") - 0.25) < 1e-10


def test_d_root_examples():
    n = lc.builtin("normal")
    assert abs(lc.d_root(n, 1, 2) - (-1)) < 1e-12
    assert abs(lc.d_root(n, 2, 1) - bs.d(2, 1)) < 1e-12
    with pytest.raises(NotApplicable):
        lc.d_root(lc.builtin("laplace"), 1.0, 1.0)
    with pytest.raises(NotApplicable):
        lc.d_root(n, 1.0, 0.0)


@pytest.mark.parametrize("fam", STRICT)
@given(k=st.floats(0.05, 20), y=st.floats(0.05, 3))
def test_d_root_reflection(fam, k, y):
    f = lc.builtin(fam)
    try:
        d = lc.d_root(f, k, y)
    except NotApplicable:
        return  # gumbel ratio is bounded by e^y
    assert abs(lc.d_root(f, 1 / k, -y) - (d + y)) < 1e-9 * max(1, abs(d))


def test_hat_surface_examples():
    n = lc.builtin("normal")
    assert lc.hat_surface(n, 0.3, 0.0) == pytest.approx(0.3, abs=1e-15)
    assert abs(lc.hat_surface(n, 0.5, 1.0) - float(mpmath.ncdf(1))) < 1e-15


@pytest.mark.parametrize("fam", STRICT)
@given(p=st.floats(0.001, 0.999), y1=st.floats(-2, 2), y2=st.floats(-2, 2))
def test_hat_surface_group(fam, p, y1, y2):
    f = lc.builtin(fam)
    lhs = lc.hat_surface(f, lc.hat_surface(f, p, y1), y2)
    assert abs(lhs - lc.hat_surface(f, p, y1 + y2)) < 1e-9


def test_hat_surface_negative_y_needs_full_support():
    with pytest.raises(NotApplicable):
        lc.hat_surface(lc.builtin("exponential"), 0.5, -1.0)


@pytest.mark.parametrize("fam", lc.FAMILIES)
@pytest.mark.parametrize("y", [0.4, 1.2, -0.6])
def test_hat_closed_form_matches_numeric_conjugate(fam, y):
    c = cs.AnalyticCurve(lc.builtin(fam), y)
    closed = al.hat(c)
    for p in (0.0, 0.05, 0.3, 0.6, 0.95, 1.0):
        assert abs(closed(p) - al.conjugate_value(c, p)) < 1e-9


def test_generator_examples():
    n = lc.generator_hat(lc.builtin("normal"))
    assert n(0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-16)
    g = lc.generator_hat(lc.builtin("gumbel"))
    assert g(1 - math.exp(-1)) == pytest.approx(math.exp(-1), abs=1e-15)
    for p in (0.1, 0.5, 0.9):
        assert g(p) == pytest.approx(-(1 - p) * math.log1p(-p), rel=1e-12)
    e = lc.generator_hat(lc.builtin("exponential"))
    assert e(0.0) == 1.0 and e(1.0) == 0.0
    for p in (0.2, 0.7):
        assert e(p) == pytest.approx(1 - p, abs=1e-15)


def test_generator_H_examples():
    pair = lc.generator_H(lc.generator_hat(lc.builtin("normal")))
    assert pair.H(0.0) == pytest.approx(norm_pdf(0.0), abs=1e-12)
    for x in (-2.0, -0.5, 0.7, 3.0):
        assert pair.H(x) == pytest.approx(norm_pdf(x) - x * norm_cdf(-x), abs=1e-10)
    zero = lc.generator_H([0.0, 0.0], ps=[0.0, 1.0])
    for x in (-3.0, -0.1, 0.0, 2.0):
        assert zero.H(x) == max(-x, 0.0)
    exp_pair = lc.generator_H([1.0, 0.0], ps=[0.0, 1.0])
    for x in (-5.0, -1.0, -0.3, 4.0):
        assert exp_pair.H(x) == pytest.approx(max(1.0, -x), abs=1e-15)
    assert (exp_pair.a, exp_pair.b) == (1.0, 0.0)


@pytest.mark.parametrize("fam", lc.FAMILIES)
def test_generator_H_in_space(fam):
    pair = lc.generator_H(lc.generator_hat(lc.builtin(fam)))
    xs = np.linspace(-30, 30, 121)
    gap = np.array([pair.H(x) - max(-x, 0.0) for x in xs])
    assert np.all(gap >= -1e-12)
    # H(x) - (-x)+ never exceeds H(0), the largest generator value
    assert np.max(gap) <= pair.H(0.0) + 1e-12
    assert abs(pair.H(200.0) - pair.a) < 1e-8
    assert abs(pair.H(-200.0) - 200.0 - pair.b) < 1e-8


def test_generator_H_rejects_non_concave():
    with pytest.raises(NotConcave):
        lc.generator_H([0.0, 0.5, 0.0, 0.5], ps=[0, 0.3, 0.6, 1])
    with pytest.raises(NotConcave):
        lc.generator_H(lambda p: p * p)


def test_reconstruct_normal():
    f = lc.reconstruct(lc.generator_hat(lc.builtin("normal")))
    assert f.support == (-math.inf, math.inf)
    zs = np.linspace(-4, 4, 81)
    assert max(abs(f.cdf(z) - norm_cdf(z)) for z in zs) < 1e-6


def test_reconstruct_exponential_shifted():
    f = lc.reconstruct(lambda p: 1.0 - p)
    assert f.support[0] == pytest.approx(-math.log(2), abs=1e-10)
    assert f.support[1] == math.inf
    for z in (-0.5, 0.0, 0.7, 3.0):
        assert f.cdf(z) == pytest.approx(1 - math.exp(-(z + math.log(2))), abs=1e-9)


def test_reconstruct_trivial_and_invalid():
    assert lc.reconstruct(lambda p: 0.0) is lc.TRIVIAL
    with pytest.raises(NonConcaveInput):
        lc.reconstruct(lambda p: (p - 0.5) ** 2)


@pytest.mark.parametrize("fam", lc.FAMILIES)
def test_generator_roundtrip(fam):
    h = lc.generator_hat(lc.builtin(fam))
    h2 = lc.generator_hat(lc.reconstruct(h))
    assert max(abs(h(p) - h2(p)) for p in np.linspace(0, 1, 101)) < 1e-6


def test_implied_vol_surface_black_scholes():
    sigma = 0.3
    rows = lc.implied_vol_surface(lc.builtin("normal"), lambda t: sigma * math.sqrt(t),
                                  [0.5, 1.0, 1.5], [0.25, 1.0, 4.0])
    assert all(abs(r.implied_vol - sigma) < 1e-8 for r in rows)


def test_implied_vol_surface_degenerate_and_gumbel():
    rows = lc.implied_vol_surface(lc.builtin("gumbel"), lambda t: math.log1p(t),
                                  [0.5, 1.0], [0.0, 1.0])
    at0 = [r for r in rows if r.t == 0.0]
    assert [r.price for r in at0] == [0.5, 0.0] and all(r.implied_vol == 0 for r in at0)
    r = next(r for r in rows if r.t == 1.0 and r.kappa == 1.0)
    assert abs(r.price - 0.25) < 1e-15
    assert abs(r.implied_vol - bs.ybs(1, 0.25)) < 1e-12


def test_implied_vol_surface_rejects_decreasing():
    with pytest.raises(ValueError):
        lc.implied_vol_surface(lc.builtin("normal"), lambda t: 1 / (1 + t), [1.0], [0.0, 1.0])


@pytest.mark.parametrize("fam", ("gumbel", "laplace", "exponential", "uniform"))
def test_involution_reflects_y(fam):
    f = lc.builtin(fam)
    inv = al.involute(cs.AnalyticCurve(f, 0.6))
    for k in KAPPAS:
        assert abs(inv.eval(k) - lc.surface_price(f, k, -0.6)) < 1e-9


@pytest.mark.parametrize("fam", ("normal", "logistic"))
def test_symmetric_density_is_self_dual(fam):
    c = cs.AnalyticCurve(lc.builtin(fam), 0.9)
    inv = al.involute(c)
    assert max(abs(inv.eval(k) - c.eval(k)) for k in KAPPAS) < 1e-9


@pytest.mark.parametrize("fam", lc.FAMILIES)
def test_membership_follows_support(fam):
    f = lc.builtin(fam)
    c = cs.AnalyticCurve(f, 0.7)
    L, R = f.support
    assert cs.is_c1(c) == (L == -math.inf)
    assert cs.is_cplus(c) == (R == math.inf)


@pytest.mark.parametrize("fam", STRICT)
def test_pde_spot_check(fam):
    f = lc.builtin(fam)
    hat_h = lc.generator_hat(f)
    h = 1e-4
    for k, y in ((0.7, 0.5), (1.0, 1.0), (1.8, 1.6)):
        dy = (lc.surface_price(f, k, y + h) - lc.surface_price(f, k, y - h)) / (2 * h)
        dk = (lc.surface_price(f, k + h, y) - lc.surface_price(f, k - h, y)) / (2 * h)
        assert abs(dy - hat_h(lc.surface_price(f, k, y) - k * dk)) < 1e-4


@pytest.mark.parametrize("fam", STRICT + ("laplace",))
def test_scaling_limits(fam):
    f = lc.builtin(fam)
    wide, narrow = lc.scaled(f, 1e-3), lc.scaled(f, 1e3)
    for k in (0.2, 0.8, 1.0, 1.5, 4.0):
        assert abs(lc.surface_price(wide, k, 1.0) - max(1 - k, 0)) < 1e-2
        assert abs(lc.surface_price(narrow, k, 1.0) - 1.0) < 1e-2


def test_tabulated_matches_laplace():
    lap = lc.builtin("laplace")
    tab = lc.TabulatedDensity([-40.0, 0.0, 40.0], [-40.0, 0.0, -40.0])
    for z in (-3.0, -0.5, 0.0, 1.0, 4.0):
        assert tab.cdf(z) == pytest.approx(lap.cdf(z), abs=1e-12)
    for k in (0.5, 1.0, 2.0):
        assert lc.surface_price(tab, k, 0.8) == pytest.approx(lc.surface_price(lap, k, 0.8), abs=1e-9)


def test_tabulated_rejects_convex_log_density():
    with pytest.raises(NotConcave):
        lc.TabulatedDensity([0.0, 1.0, 2.0], [0.0, -1.0, 0.0])


@pytest.mark.parametrize("fam", ["laplace", "exponential"])
def test_piecewise_linear_generator_is_exact(fam):
    # these generators are themselves piecewise linear
    f = lc.builtin(fam)
    ps = np.linspace(0.0, 1.0, 11)
    d = lc.reconstruct(lc.generator_H([lc.generator_hat(f)(p) for p in ps], ps))
    shift = f.ppf(0.5)
    for z in np.linspace(-3.0, 3.0, 25):
        assert d.cdf(z) == pytest.approx(f.cdf(z + shift), abs=1e-14)
        assert d.pdf(z) == pytest.approx(f.pdf(z + shift), abs=1e-14)
    assert d.cdf(0.0) == 0.5


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
def test_piecewise_linear_reconstruction_inverts(decrements):
    # concave: nonincreasing slopes built from positive decrements
    slopes = 1.0 - np.cumsum(decrements)
    ps = np.linspace(0.0, 1.0, slopes.size + 1)
    vals = np.concatenate(([0.0], np.cumsum(slopes * np.diff(ps))))
    vals -= np.minimum(0.0, vals.min())
    pair = lc.generator_H(vals, ps)
    d = lc.reconstruct(pair)
    if d is lc.TRIVIAL:
        return
    assert d.cdf(0.0) == pytest.approx(0.5, abs=1e-14)
    for p in np.linspace(0.02, 0.98, 17):
        z = d.ppf(p)
        assert d.cdf(z) == pytest.approx(p, abs=1e-12)
        assert d.pdf(z) == pytest.approx(pair.hat_h(p), rel=1e-10, abs=1e-14)
