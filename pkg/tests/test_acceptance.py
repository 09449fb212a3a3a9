"""Acceptance gate: twelve end-to-end criteria at their stated tolerances.

Run with ``pytest tests/test_acceptance.py -v`` (a summary block lists one
PASS/FAIL line per criterion) or directly with ``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from callspace import algebra as al
from callspace import blackscholes as bs
from callspace import curvespace as cs
from callspace import logconcave as lc
from callspace import peacock as pk
from callspace import zonoid as zn
from callspace.fixtures import fixture_curves, random_curve, random_distribution
from callspace.normal import norm_cdf, norm_ppf

SEED = 20240611
RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (bool(ok), detail)
    assert ok, detail


def eval_grid(curve):
    ks = curve.knots()
    extra = [] if ks is None else list(ks)
    return np.unique(np.concatenate((np.geomspace(0.01, 100.0, 61), extra)))


def test_criterion_01_black_scholes_inequality():
    rng = np.random.default_rng(SEED + 1)
    n = 10_000
    k = np.exp(rng.uniform(math.log(0.05), math.log(20.0), (n, 2)))
    y = rng.uniform(0.05, 5.0, (n, 2))
    worst = min(bs.bs_inequality_gap(*k[i], *y[i]) for i in range(n))
    eq_worst, n_eq = 0.0, 0
    for i in range(n):
        # kappa2 chosen so that d(k1, y1) = d(k2, y2) + y2
        k2 = math.exp(-y[i, 1] * (bs.d(k[i, 0], y[i, 0]) - 0.5 * y[i, 1]))
        if not (1e-300 < k2 < 1e300 and bs.bs_equality(k[i, 0], k2, y[i, 0], y[i, 1])):
            continue
        n_eq += 1
        eq_worst = max(eq_worst, abs(bs.bs_inequality_gap(k[i, 0], k2, y[i, 0], y[i, 1])))
    record(1, worst >= -1e-12 and eq_worst < 1e-8 and n_eq > n // 2,
           f"min gap {worst:.3g} (>= -1e-12); equality |gap| {eq_worst:.3g} (< 1e-8, n={n_eq})")


def test_criterion_02_semigroup():
    kappas = np.linspace(0.1, 10.0, 50)
    ys = (0.1, 0.5, 1.0, 2.0)
    worst, where = 0.0, None
    for fam in ("normal", "gumbel", "logistic"):
        f = lc.builtin(fam)
        for y1 in ys:
            for y2 in ys:
                b = al.bullet(cs.AnalyticCurve(f, y1), cs.AnalyticCurve(f, y2))
                dev = max(abs(b.eval(k) - lc.surface_price(f, k, y1 + y2)) for k in kappas)
                if dev >= worst:
                    worst, where = dev, (fam, y1, y2)
    record(2, worst < 1e-8, f"max |bullet - C_f(y1+y2)| {worst:.3g} at {where} (< 1e-8)")


def test_criterion_03_hat_closed_form():
    ps = np.round(np.arange(1, 100) / 100.0, 2)
    f = lc.builtin("normal")
    worst, worst_numeric = 0.0, 0.0
    for y in (0.5, 1.0, 2.0):
        c = cs.AnalyticCurve(f, y)
        g = al.hat(c)
        for p in ps:
            ref = norm_cdf(norm_ppf(p) + y)
            worst = max(worst, abs(g(p) - ref))
            # the generic conjugate search, bypassing the closed form
            worst_numeric = max(worst_numeric, abs(al.conjugate_value(c, p) - ref))
    record(3, worst < 1e-10 and worst_numeric < 1e-10,
           f"closed form {worst:.3g}, numeric conjugate {worst_numeric:.3g} (< 1e-10)")


def test_criterion_04_fenchel_moreau_roundtrip():
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(1000):
        c = random_curve(rng)
        back = al.unhat(al.hat(c))
        worst = max(worst, max(abs(back.eval(k) - c.eval(k)) for k in c.strikes))
        worst = max(worst, abs(back.c_inf - c.c_inf))
    record(4, worst <= 1e-12, f"max knot deviation {worst:.3g} over 1000 curves (<= 1e-12)")


def test_criterion_05_involution():
    rng = np.random.default_rng(SEED + 5)
    curves = list(fixture_curves().values()) + [random_curve(rng) for _ in range(100)]
    double = max(max(abs(al.involute(al.involute(c)).eval(k) - c.eval(k)) for k in eval_grid(c))
                 for c in curves)
    self_dual = max(abs(al.involute(cs.AnalyticCurve(lc.builtin("normal"), y)).eval(k) - bs.cbs(k, y))
                    for y in (0.25, 0.5, 1.0, 2.0, 3.0) for k in np.geomspace(0.05, 20.0, 60))
    fixed = list(fixture_curves().values())
    anti = 0.0
    for c1 in fixed:
        for c2 in fixed:
            lhs = al.involute(al.bullet(c1, c2))
            rhs = al.bullet(al.involute(c2), al.involute(c1))
            grid = np.unique(np.concatenate((eval_grid(lhs), eval_grid(rhs))))
            anti = max(anti, max(abs(lhs.eval(k) - rhs.eval(k)) for k in grid))
    record(5, double <= 1e-12 and self_dual <= 1e-10 and anti <= 1e-8,
           f"double {double:.3g} (1e-12), normal self-dual {self_dual:.3g} (1e-10), "
           f"anti-homomorphism {anti:.3g} (1e-8)")


def test_criterion_06_hat_inverse_identity():
    rng = np.random.default_rng(SEED + 6)
    curves = list(fixture_curves().values()) + [random_curve(rng) for _ in range(100)]
    ps = np.linspace(0.0, 1.0, 201)
    worst = 0.0
    for c in curves:
        g, gs = al.hat(c), al.hat(al.involute(c))
        worst = max(worst, max(abs(gs(p) - (1.0 - al.hat_inverse(g, 1.0 - p))) for p in ps))
    record(6, worst < 1e-10, f"max deviation {worst:.3g} over {len(curves)} curves (< 1e-10)")


def test_criterion_07_countermonotone_oracle():
    rng = np.random.default_rng(SEED + 7)
    kappas = (0.05, 0.2, 0.5, 0.9, 1.0, 1.3, 2.0, 5.0, 20.0)
    worst = 0.0
    for _ in range(500):
        d1, d2 = random_distribution(rng, 8), random_distribution(rng, 8)
        c1, c2 = cs.curve_of(d1), cs.curve_of(d2)
        dual2 = cs.dual_distribution(d2)
        for k in kappas:
            worst = max(worst, abs(al.bullet_direct(c1, c2, k) - al.countermonotone_price(d1, dual2, k)))
    record(7, worst < 1e-10, f"max |bullet_direct - coupling| {worst:.3g} over 500 pairs (< 1e-10)")


def test_criterion_08_zonoid_oracle():
    rng = np.random.default_rng(SEED + 8)
    worst = 0.0
    for _ in range(500):
        d = random_distribution(rng, 10)
        a = zn.lift_zonoid_from_curve(cs.curve_of(d))
        b = zn.lift_zonoid_from_quantiles(d, a.ps)
        worst = max(worst, float(np.max(np.abs(a.upper - b.upper))),
                    float(np.max(np.abs(a.lower - b.lower))))
    disagree, ordered = 0, 0
    for _ in range(100):
        c1 = random_curve(rng, 6, mean_one=True)
        c2 = al.bullet(c1, random_curve(rng, 4, mean_one=True)) if rng.random() < 0.5 \
            else random_curve(rng, 6, mean_one=True)
        z, o = zn.zonoid_leq(c1, c2), pk.convex_order_leq(c1, c2)
        disagree += z != o
        ordered += o
    record(8, worst < 1e-10 and disagree == 0,
           f"boundary deviation {worst:.3g} (< 1e-10); {disagree} disagreements "
           f"in 100 pairs ({ordered} ordered)")


def test_criterion_09_generator_reconstruction():
    f = lc.reconstruct(lc.generator_hat(lc.builtin("normal")))
    sup = max(abs(f.cdf(z) - norm_cdf(z)) for z in np.linspace(-4.0, 4.0, 161))
    ps = np.linspace(0.0, 1.0, 101)
    round_trip = 0.0
    for fam in lc.FAMILIES:
        h = lc.generator_hat(lc.builtin(fam))
        h2 = lc.generator_hat(lc.reconstruct(h))
        round_trip = max(round_trip, max(abs(h(p) - h2(p)) for p in ps))
    record(9, sup < 1e-6 and round_trip < 1e-6,
           f"normal cdf sup error {sup:.3g}; generator round trip {round_trip:.3g} "
           f"over {len(lc.FAMILIES)} families (< 1e-6)")


def test_criterion_10_pde_consistency():
    h = 1e-4
    worst = 0.0
    for fam in ("normal", "gumbel"):
        f = lc.builtin(fam)
        hat_h = lc.generator_hat(f)
        for k in np.geomspace(0.3, 3.0, 10):
            for y in np.linspace(0.2, 2.0, 10):
                dy = (lc.surface_price(f, k, y + h) - lc.surface_price(f, k, y - h)) / (2 * h)
                dk = (lc.surface_price(f, k + h, y) - lc.surface_price(f, k - h, y)) / (2 * h)
                worst = max(worst, abs(dy - hat_h(lc.surface_price(f, k, y) - k * dk)))
    record(10, worst < 1e-4, f"max residual {worst:.3g} at 2 x 100 points (< 1e-4)")


def test_criterion_11_gumbel_martingale():
    start = time.perf_counter()
    rep = pk.gumbel_martingale_sim([0.25, 0.5, 1.0], 1_000_000, seed=SEED)
    elapsed = time.perf_counter() - start
    means = ", ".join(f"{abs(m - 1) / s:.2f}" for m, s in zip(rep.means, rep.ses))
    ks = max(rep.ks_statistics)
    inc = max(abs(t.mean) / t.se for t in rep.increments)
    record(11, rep.passed, f"|mean-1|/SE [{means}] (< 3); KS {ks:.3g} < {rep.ks_critical:.3g}; "
                           f"increments max {inc:.2f} SE (< 3); {elapsed:.1f}s")


def test_criterion_12_sifin_bound():
    rng = np.random.default_rng(SEED + 12)
    n = 10_000
    ks = np.exp(rng.uniform(math.log(0.05), math.log(20.0), n))
    ys = rng.uniform(0.05, 5.0, n)
    ps = rng.uniform(0.0, 1.0, n)
    slack = min(bs.cbs(k, y) - bs.sifin_lower_bound(k, y, p) for k, y, p in zip(ks, ys, ps))
    eq = max(abs(bs.cbs(k, y) - bs.sifin_lower_bound(k, y, norm_cdf(bs.d(k, y))))
             for k, y in zip(ks, ys))
    record(12, slack >= -1e-12 and eq < 1e-10,
           f"min cbs - bound {slack:.3g} (>= -1e-12); equality deviation {eq:.3g} (< 1e-10)")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for fn in tests:
        try:
            fn()
        except AssertionError:
            pass
    for key in sorted(RESULTS):
        ok, detail = RESULTS[key]
        print(f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    sys.exit(0 if len(RESULTS) == 12 and all(ok for ok, _ in RESULTS.values()) else 1)
