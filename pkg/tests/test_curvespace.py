import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from callspace import curvespace as cs
from callspace import logconcave as lc
from callspace.errors import InvalidCurve, MeanExceedsOne
from callspace.fixtures import random_distribution


@st.composite
def distributions(draw, max_atoms=8):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_distribution(np.random.default_rng(seed), max_atoms)


def brute_price(dist, k):
    return 1.0 - sum(p * min(a, k) for a, p in zip(dist.atoms, dist.probs))


def test_validate_examples():
    assert cs.validate(cs.GridCurve([0, 1, 2], [1, 0.2, 0.1], 0.1)) == []
    bad = cs.validate(cs.GridCurve([0, 1, 2], [1, 0.1, 0.5], 0.5))
    assert any(v.invariant == "nonincreasing" and v.kappa == 2.0 for v in bad)
    bad = cs.validate(cs.GridCurve([0, 1], [0.9, 0.2], 0.2))
    assert "C(0)=1" in {v.invariant for v in bad}


def test_validate_convexity_and_slope():
    bad = cs.validate(cs.GridCurve([0, 1, 2], [1, 0.6, 0.0], 0.0))
    assert "convex" in {v.invariant for v in bad}
    bad = cs.validate(cs.GridCurve([0, 0.5], [1, 0.2], 0.2))
    assert {"slope>=-1", "bounds"} <= {v.invariant for v in bad}


def test_grid_structure_errors():
    with pytest.raises(InvalidCurve):
        cs.GridCurve([0.1, 1], [1, 0], 0)
    with pytest.raises(InvalidCurve):
        cs.GridCurve([0, 1, 1], [1, 0.5, 0.5], 0)
    with pytest.raises(InvalidCurve):
        cs.GridCurve([0, 1], [1, math.nan], 0)


def test_eval_examples():
    assert cs.E.eval(0.5) == 0.5
    assert cs.Z.eval(7) == 1.0
    assert cs.GridCurve([0, 1, 2], [1, 0.2, 0.1], 0.1).eval(1.5) == pytest.approx(0.15, abs=1e-16)


def test_extrapolation_rule():
    c = cs.GridCurve([0, 1], [1, 0.5], 0.2)
    assert c.eval(1.4) == pytest.approx(0.3, abs=1e-15)
    assert c.eval(1.6) == pytest.approx(0.2, abs=1e-15)
    assert c.eval(100) == 0.2
    assert c.right_derivative(1.6) == 0.0


def test_single_knot_grid_is_z():
    assert cs.validate(cs.GridCurve([0], [1], 1)) == []
    assert cs.GridCurve([0], [1], 1).eval(3) == 1.0


def test_right_derivative_examples():
    assert cs.right_derivative(cs.E, 0.5) == -1.0
    assert cs.right_derivative(cs.E, 1.0) == 0.0
    assert cs.right_derivative(cs.Z, 3) == 0.0


def test_primal_dual_examples():
    assert cs.primal_survival(cs.E, 0.5) == 1.0
    assert cs.primal_survival(cs.E, 1.0) == 0.0
    two = cs.curve_of(cs.DiscreteDistribution([0.5, 1.5], [0.5, 0.5]))
    assert cs.primal_survival(two, 1.0) == 0.5
    assert cs.dual_cdf(cs.E, 2) == 0.0
    assert cs.dual_cdf(cs.E, 0.5) == 1.0
    assert cs.dual_cdf(cs.Z, 1) == 1.0


def test_curve_of_examples():
    e = cs.curve_of(cs.DiscreteDistribution([1], [1]))
    assert all(e.eval(k) == cs.E.eval(k) for k in (0, 0.3, 1, 4))
    z = cs.curve_of(cs.DiscreteDistribution([0], [1]))
    assert all(z.eval(k) == 1.0 for k in (0, 0.3, 1, 4)) and z.c_inf == 1.0
    two = cs.curve_of(cs.DiscreteDistribution([0.5, 1.5], [0.5, 0.5]))
    # 1 - E(S ^ 1.5) = 1 - E S = 0 since the mean is exactly 1
    assert two.strikes.tolist() == [0, 0.5, 1.5]
    assert np.allclose(two.prices, [1, 0.5, 0.0], atol=1e-15)
    assert two.c_inf == 0.0


def test_curve_of_mean_too_large():
    with pytest.raises(MeanExceedsOne):
        cs.curve_of(cs.DiscreteDistribution([2.0], [1.0]))


def test_discrete_distribution_checks():
    d = cs.DiscreteDistribution([1.0, 0.5, 1.0], [0.25, 0.5, 0.25])
    assert d.atoms.tolist() == [0.5, 1.0] and d.probs.tolist() == [0.5, 0.5]
    with pytest.raises(ValueError):
        cs.DiscreteDistribution([1.0], [0.9])
    with pytest.raises(ValueError):
        cs.DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])


def test_membership_examples():
    assert cs.is_c1(cs.E) and cs.is_cplus(cs.E)
    assert not cs.is_c1(cs.Z)
    bs1 = cs.AnalyticCurve(lc.builtin("normal"), 1.0)
    assert cs.is_c1(bs1) and cs.is_cplus(bs1)


@given(distributions())
def test_curve_of_is_valid(d):
    assert cs.validate(cs.curve_of(d)) == []


@given(distributions(), st.floats(0, 20))
def test_curve_of_matches_brute_force(d, k):
    assert cs.curve_of(d).eval(k) == pytest.approx(brute_price(d, k), abs=1e-13)


@given(distributions())
def test_survival_matches_atoms(d):
    c = cs.curve_of(d)
    probes = list(d.atoms) + list((d.atoms[:-1] + d.atoms[1:]) / 2) + [d.atoms[-1] + 1]
    for k in probes:
        assert cs.primal_survival(c, float(k)) == pytest.approx(d.survival(k), abs=1e-12)


@given(distributions())
def test_price_decomposition(d):
    c = cs.curve_of(d)
    for k in np.concatenate((d.atoms[d.atoms > 0], [0.05, 0.7, 3.0])):
        k = float(k)
        lhs = cs.dual_cdf(c, k) - k * cs.primal_survival(c, k)
        assert lhs == pytest.approx(c.eval(k), abs=1e-12)


@given(distributions())
def test_dual_distribution_represents_same_curve(d):
    c = cs.curve_of(d)
    dual = cs.dual_distribution(d)
    for k in (0.1, 0.5, 1.0, 2.0, 9.0):
        dual_price = 1.0 - float(np.dot(dual.probs, np.minimum(1.0, dual.atoms * k)))
        assert dual_price == pytest.approx(c.eval(k), abs=1e-12)


@given(distributions(), st.floats(0, 10), st.floats(0, 10))
def test_monotone(d, a, b):
    c = cs.curve_of(d)
    lo, hi = min(a, b), max(a, b)
    assert c.eval(lo) >= c.eval(hi)


def test_analytic_curve_validates():
    for fam in ("normal", "gumbel", "logistic"):
        assert cs.validate(cs.AnalyticCurve(lc.builtin(fam), 0.8)) == []


def test_to_grid_samples_analytic():
    c = cs.AnalyticCurve(lc.builtin("normal"), 1.0)
    g = cs.to_grid(c, np.geomspace(0.01, 100, 51))
    assert cs.validate(g) == []
    assert g.eval(1.0) == pytest.approx(c.eval(1.0), abs=1e-15)
