"""Verification suites run by ``callspace verify``.

Each suite returns a report ``{"suite", "checks", "pass"}`` where every check
carries its maximum deviation, tolerance and pass flag.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import algebra as al
from . import blackscholes as bs
from . import curvespace as cs
from . import logconcave as lc
from . import peacock as pk
from . import zonoid as zn
from .fixtures import fixture_analytic, fixture_curves, random_curve, random_distribution

P_GRID = np.linspace(0.0, 1.0, 201)


def _check(name: str, deviation: float, tol: float, strict: bool = True) -> dict:
    ok = deviation < tol if strict else deviation <= tol
    return {"name": name, "max_deviation": float(deviation), "tolerance": tol, "pass": bool(ok)}


def _report(suite: str, checks: list[dict], **extra) -> dict:
    return {"suite": suite, **extra, "checks": checks, "pass": all(c["pass"] for c in checks)}


def _eval_grid(curve: cs.CallCurve) -> np.ndarray:
    ks = curve.knots()
    extra = [] if ks is None else list(ks)
    return np.unique(np.concatenate((cs.SAMPLE_KAPPAS[::4], extra)))


def semigroup(density: lc.LogConcaveDensity, y1: float, y2: float,
              kappas: Sequence[float]) -> dict:
    c1, c2 = cs.AnalyticCurve(density, y1), cs.AnalyticCurve(density, y2)
    b = al.bullet(c1, c2)
    dev = max(abs(b.eval(k) - lc.surface_price(density, k, y1 + y2)) for k in kappas)
    dev_direct = max(abs(al.bullet_direct(c1, c2, k) - lc.surface_price(density, k, y1 + y2))
                     for k in kappas)
    return _report("semigroup", [_check("bullet", dev, 1e-8),
                                 _check("bullet_direct", dev_direct, 1e-8)],
                   family=getattr(density, "family", "?"), y1=y1, y2=y2)


def _involution_checks(curves: dict[str, cs.CallCurve]) -> tuple[float, float]:
    double, inverse = 0.0, 0.0
    for c in curves.values():
        cc = al.involute(al.involute(c))
        double = max(double, max(abs(cc.eval(k) - c.eval(k)) for k in _eval_grid(c)))
        g, gs = al.hat(c), al.hat(al.involute(c))
        inverse = max(inverse, max(abs(gs(p) - (1.0 - al.hat_inverse(g, 1.0 - p)))
                                   for p in P_GRID))
    return double, inverse


def involution(seed: int | None = None, samples: int = 0) -> dict:
    curves = fixture_curves()
    if samples:
        rng = np.random.default_rng(seed)
        curves.update({f"random_{i}": random_curve(rng) for i in range(samples)})
    double, inverse = _involution_checks(curves)
    bs_dev = 0.0
    for y in (0.5, 1.0, 2.0):
        c = al.involute(cs.AnalyticCurve(lc.builtin("normal"), y))
        bs_dev = max(bs_dev, max(abs(c.eval(k) - bs.cbs(k, y)) for k in np.geomspace(0.05, 20, 60)))
    anti = 0.0
    fixed = list(fixture_curves().values())
    for c1 in fixed:
        for c2 in fixed:
            lhs = al.involute(al.bullet(c1, c2))
            rhs = al.bullet(al.involute(c2), al.involute(c1))
            grid = np.unique(np.concatenate((_eval_grid(lhs), _eval_grid(rhs))))
            anti = max(anti, max(abs(lhs.eval(k) - rhs.eval(k)) for k in grid))
    return _report("involution", [
        _check("double_involution", double, 1e-12, strict=False),
        _check("normal_self_dual", bs_dev, 1e-10),
        _check("anti_homomorphism", anti, 1e-8),
        _check("hat_inverse_identity", inverse, 1e-10),
    ])


def isomorphism() -> dict:
    grids = list(fixture_curves().values())
    analytic = list(fixture_analytic().values())
    iso, direct = 0.0, 0.0
    for c1 in grids:
        for c2 in grids:
            lhs = al.hat(al.bullet(c1, c2))
            rhs = al.compose(al.hat(c1), al.hat(c2))
            iso = max(iso, max(abs(lhs(p) - rhs(p)) for p in P_GRID))
            b = al.bullet(c1, c2)
            direct = max(direct, max(abs(b.eval(k) - al.bullet_direct(c1, c2, k))
                                     for k in _eval_grid(b)))
    kappas = np.geomspace(0.1, 10, 25)
    for c1 in analytic:
        for c2 in grids[:3]:
            b = al.bullet(c1, c2)
            direct = max(direct, max(abs(b.eval(k) - al.bullet_direct(c1, c2, k)) for k in kappas))
    return _report("isomorphism", [_check("hat_of_bullet", iso, 1e-8),
                                   _check("bullet_vs_direct", direct, 1e-8)])


def zonoid(seed: int, samples: int = 500, pairs: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(samples):
        d = random_distribution(rng, 10)
        a = zn.lift_zonoid_from_curve(cs.curve_of(d))
        b = zn.lift_zonoid_from_quantiles(d, a.ps)
        dev = max(dev, float(np.max(np.abs(a.upper - b.upper))),
                  float(np.max(np.abs(a.lower - b.lower))))
    disagree = 0
    for _ in range(pairs):
        c1 = random_curve(rng, 6, mean_one=True)
        # half the pairs are ordered by construction
        c2 = al.bullet(c1, random_curve(rng, 4, mean_one=True)) if rng.random() < 0.5 \
            else random_curve(rng, 6, mean_one=True)
        disagree += zn.zonoid_leq(c1, c2) != pk.convex_order_leq(c1, c2)
    return _report("zonoid", [_check("quantile_oracle", dev, 1e-10),
                              _check("order_disagreements", disagree, 0, strict=False)],
                   seed=seed)


def peacock(density: lc.LogConcaveDensity, yfun, ts: Sequence[float],
            kappas: Sequence[float]) -> dict:
    fam = pk.PeacockFamily(density, yfun, tuple(ts))
    res = pk.verify_peacock(fam, kappas)
    check = {"name": "convex_order_increasing", "max_deviation": 0.0 if res.ok else 1.0,
             "tolerance": 0.0, "pass": res.ok}
    return _report("peacock", [check], first_violation=None if res.ok else
                   {"t": res.t, "kappa": res.kappa})


def equality_kappa2(kappa1: float, y1: float, y2: float) -> float:
    """The ``kappa2`` with ``d(kappa1, y1) = d(kappa2, y2) + y2``."""
    return math.exp(-y2 * (bs.d(kappa1, y1) - 0.5 * y2))


def inequality(seed: int, samples: int = 10_000) -> dict:
    rng = np.random.default_rng(seed)
    k = np.exp(rng.uniform(math.log(0.05), math.log(20.0), (samples, 2)))
    y = rng.uniform(0.05, 5.0, (samples, 2))
    worst = min(bs.bs_inequality_gap(k[i, 0], k[i, 1], y[i, 0], y[i, 1]) for i in range(samples))
    eq_dev, n_eq = 0.0, 0
    for i in range(samples):
        k2 = equality_kappa2(k[i, 0], y[i, 0], y[i, 1])
        if not 1e-300 < k2 < 1e300:
            continue
        n_eq += 1
        eq_dev = max(eq_dev, abs(bs.bs_inequality_gap(k[i, 0], k2, y[i, 0], y[i, 1])))
    return _report("inequality", [
        _check("gap_lower_bound", max(0.0, -worst), 1e-12, strict=False),
        _check("equality_case", eq_dev, 1e-8),
    ], seed=seed, samples=samples, min_gap=worst, equality_samples=n_eq)
