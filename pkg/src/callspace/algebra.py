"""The conjugate transform, the binary operation and the involution.

The concave conjugate ``hat(C)(p) = inf_k [C(k) + p k]`` maps call curves
bijectively onto concave nondecreasing maps of ``[0, 1]`` fixing 1. Under it
the operation

    (C1 . C2)(k) = inf_{eta > 0} [C1(eta) + eta C2(k / eta)]

becomes composition ``hat(C1) o hat(C2)``. For piecewise-linear inputs every
transform here is exact; for analytic inputs the results are evaluated lazily.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import curvespace as cs
from . import logconcave as lc
from ._numerics import golden_min
from .config import get_tolerances
from .errors import InvalidCurve, NotConcave


class HatCurve:
    """Concave nondecreasing ``g: [0, 1] -> [0, 1]`` with ``g(1) = 1``."""

    def value(self, p: float) -> float:
        raise NotImplementedError

    def __call__(self, p):
        if np.ndim(p):
            return np.array([self.value(float(x)) for x in np.ravel(p)]).reshape(np.shape(p))
        return self.value(float(p))


class GridHat(HatCurve):
    """Piecewise-linear conjugate through ``(ps[i], values[i])``."""

    def __init__(self, ps, values):
        ps = np.array(ps, dtype=float)
        vs = np.array(values, dtype=float)
        if ps.ndim != 1 or ps.shape != vs.shape or ps.size < 2:
            raise NotConcave("ps and values must be matching 1-d arrays of length >= 2")
        if ps[0] != 0.0 or ps[-1] != 1.0 or np.any(np.diff(ps) <= 0):
            raise NotConcave("ps must increase strictly from 0 to 1")
        ps.setflags(write=False)
        vs.setflags(write=False)
        self.ps, self.values = ps, vs

    def __repr__(self):
        return f"GridHat(ps={self.ps.tolist()}, values={self.values.tolist()})"

    def value(self, p):
        return float(np.interp(p, self.ps, self.values))

    def slopes(self):
        return np.diff(self.values) / np.diff(self.ps)

    def violations(self, tol: float | None = None) -> list[str]:
        tol = get_tolerances().algebra if tol is None else tol
        out = []
        s = self.slopes()
        if abs(self.values[-1] - 1.0) > tol:
            out.append("g(1)=1")
        if np.any(s < -tol):
            out.append("nondecreasing")
        # chord test in value units; slopes of tiny segments carry rounding noise
        w = (self.ps[1:-1] - self.ps[:-2]) / (self.ps[2:] - self.ps[:-2])
        chord = (1 - w) * self.values[:-2] + w * self.values[2:]
        if np.any(self.values[1:-1] < chord - tol):
            out.append("concave")
        if np.any(self.values < self.ps - tol):
            out.append("g(p)>=p")
        if self.values[0] < -tol:
            out.append("g(0)>=0")
        return out


class FunctionHat(HatCurve):
    """Conjugate given by a callable; used when no finite form exists."""

    def __init__(self, fn: Callable[[float], float], label: str = "function"):
        self.fn = fn
        self.label = label

    def __repr__(self):
        return f"FunctionHat({self.label})"

    def value(self, p):
        if p <= 0:
            p = 0.0
        elif p >= 1:
            return 1.0
        return float(self.fn(p))


class AnalyticHat(FunctionHat):
    """``F(F^{-1}(p) + y)`` for ``y >= 0``, and its reflection for ``y < 0``."""

    def __init__(self, density: lc.LogConcaveDensity, y: float):
        self.density, self.y = density, y
        super().__init__(lambda p: lc.hat_surface_value(density, p, y),
                         f"{density!r}, y={y}")


class ComposedHat(FunctionHat):
    def __init__(self, outer: HatCurve, inner: HatCurve):
        self.outer, self.inner = outer, inner
        super().__init__(lambda p: outer.value(inner.value(p)), f"{outer!r} o {inner!r}")


class NumericHat(FunctionHat):
    """Conjugate computed by direct minimisation over strikes."""

    def __init__(self, curve: cs.CallCurve):
        self.curve = curve
        super().__init__(lambda p: conjugate_value(curve, p), f"numeric({curve!r})")


IDENTITY_HAT = GridHat([0.0, 1.0], [0.0, 1.0])
ONE_HAT = GridHat([0.0, 1.0], [1.0, 1.0])


def conjugate_value(curve: cs.CallCurve, p: float) -> float:
    """``inf_{k >= 0} [C(k) + p k]`` by golden-section search.

    Since ``C(k) + p k >= p k`` the minimiser lies in ``[0, 1/p]``.
    """
    if p <= 0:
        return float(curve.c_inf)
    hi = 1.0 / p
    # search in sqrt-scale so small strikes get resolution
    fn = lambda u: curve.eval(u * u) + p * u * u  # noqa: E731
    _, v = golden_min(fn, 0.0, math.sqrt(hi), tol=1e-13)
    knots = curve.knots()
    if knots is not None:
        v = min(v, float(np.min([curve.eval(float(k)) + p * k for k in knots])))
    return min(v, 1.0)


KNOT_EPS = 1e-14


def _merge_knots(ps: np.ndarray) -> np.ndarray:
    """Sorted unique knots in ``[0, 1]`` with rounding-level neighbours merged."""
    ps = np.unique(np.clip(ps, 0.0, 1.0))
    keep = [0.0]
    for p in ps[1:-1]:
        if p - keep[-1] > KNOT_EPS and 1.0 - p > KNOT_EPS:
            keep.append(float(p))
    keep.append(1.0)
    return np.array(keep)


def _grid_hat(curve: cs.GridCurve) -> GridHat:
    ks, cs_ = curve.knots(), np.array([curve.eval(float(k)) for k in curve.knots()])
    slopes = curve.slopes()
    breaks = {0.0, 1.0}
    breaks.update(float(-s) for s in slopes if 0.0 < -s < 1.0)
    ps = _merge_knots(np.array(sorted(breaks)))
    vals = np.min(cs_[None, :] + ps[:, None] * ks[None, :], axis=1)
    # convexity gives C(k) >= 1 + C'(0) k, so the value is exactly 1 from -C'(0) on
    if slopes.size:
        vals[ps >= -slopes[0]] = 1.0
    return GridHat(ps, vals)


def _as_grid(curve):
    if isinstance(curve, cs.SpecialCurve):
        return curve.as_grid()
    return curve


def hat(curve: cs.CallCurve) -> HatCurve:
    """The concave conjugate of a call curve.

    Exact for grid and special curves; closed form for analytic ones.
    """
    if isinstance(curve, cs.SpecialCurve):
        return IDENTITY_HAT if curve.name == "E" else ONE_HAT
    if isinstance(curve, cs.GridCurve):
        bad = cs.validate(curve)
        if bad:
            raise InvalidCurve("; ".join(f"{v.invariant} at {v.kappa}" for v in bad))
        return _grid_hat(curve)
    if isinstance(curve, cs.AnalyticCurve):
        return AnalyticHat(curve.density, curve.y)
    if isinstance(curve, cs.ConjugateCurve):
        return curve.hat_curve
    return NumericHat(curve)


def unhat(g: HatCurve) -> cs.CallCurve:
    """Inverse transform ``C(k) = max_p [g(p) - p k]``."""
    if isinstance(g, GridHat):
        bad = g.violations()
        if bad:
            raise NotConcave("invalid conjugate: " + ", ".join(bad))
        slopes = g.slopes()
        # slopes at rounding level are not strikes
        strikes = np.unique(np.concatenate(([0.0], slopes[slopes > KNOT_EPS])))
        prices = np.max(g.values[None, :] - g.ps[None, :] * strikes[:, None], axis=1)
        prices[0] = 1.0
        # exact slope on each segment: minus the maximising p at its midpoint
        mids = 0.5 * (strikes[:-1] + strikes[1:])
        arg = np.argmax(g.values[None, :] - g.ps[None, :] * mids[:, None], axis=1)
        return cs.GridCurve(strikes, np.minimum(prices, 1.0), float(g.values[0]),
                            slopes=-g.ps[arg])
    return cs.ConjugateCurve(g)


def compose(outer: HatCurve, inner: HatCurve) -> HatCurve:
    """``outer o inner``; exact on the merged knot set for grid inputs."""
    if isinstance(outer, GridHat) and isinstance(inner, GridHat):
        lo, hi = inner.values[0], inner.values[-1]
        pre = [hat_inverse(inner, float(q)) for q in outer.ps if lo < q < hi]
        ps = _merge_knots(np.concatenate((inner.ps, pre)))
        vals = np.interp(np.interp(ps, inner.ps, inner.values), outer.ps, outer.values)
        return GridHat(ps, vals)
    return ComposedHat(outer, inner)


def hat_inverse(g: HatCurve, q: float) -> float:
    """Generalised inverse ``inf{p >= 0 : g(p) >= q}``."""
    if q <= g.value(0.0):
        return 0.0
    if isinstance(g, GridHat):
        j = int(np.argmax(g.values >= q))
        if g.values[j] < q:
            return 1.0
        p0, p1 = g.ps[j - 1], g.ps[j]
        v0, v1 = g.values[j - 1], g.values[j]
        return float(min(p0 + (q - v0) * (p1 - p0) / (v1 - v0), p1))
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g.value(mid) >= q:
            hi = mid
        else:
            lo = mid
    return hi


def bullet(c1: cs.CallCurve, c2: cs.CallCurve) -> cs.CallCurve:
    """``C1 . C2`` computed as ``unhat(hat(C1) o hat(C2))``."""
    return unhat(compose(hat(c1), hat(c2)))


def _objective(c1, c2, kappa):
    def fn(eta):
        ratio = kappa / eta if eta > 0 else math.inf
        if not math.isfinite(ratio):
            return 1.0  # eta -> 0 limit
        return c1.eval(eta) + eta * c2.eval(ratio)
    return fn


def bullet_direct(c1: cs.CallCurve, c2: cs.CallCurve, kappa: float) -> float:
    """``inf_{eta > 0} [C1(eta) + eta C2(kappa/eta)]`` straight from the definition.

    The objective is convex in ``eta``; golden-section search runs in
    ``log(eta)`` over a bracket grown until the minimiser is interior. For
    piecewise-linear inputs the objective is piecewise linear in ``eta`` with
    breaks at the knots of ``C1`` and at ``kappa/k`` for knots ``k`` of ``C2``,
    which are checked as well. As ``eta -> 0`` the objective tends to 1.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if kappa == 0:
        return 1.0
    fn = _objective(c1, c2, kappa)
    g = lambda u: fn(math.exp(u))  # noqa: E731
    lo, hi = math.log(1e-8), math.log(1e8)
    for _ in range(8):
        u, v = golden_min(g, lo, hi, tol=1e-13)
        width = hi - lo
        if u - lo < 1e-6 * width and lo > -700:
            lo = max(lo - width, -700.0)
        elif hi - u < 1e-6 * width and hi < 700:
            hi = min(hi + width, 700.0)
        else:
            break
    best = min(v, 1.0)
    k1, k2 = c1.knots(), c2.knots()
    if k1 is not None and k2 is not None:
        cands = [float(k) for k in k1 if k > 0]
        cands += [kappa / float(k) for k in k2 if k > 0]
        for eta in cands:
            best = min(best, fn(eta))
    return best


def involute(curve: cs.CallCurve) -> cs.CallCurve:
    """``C*(k) = 1 - k + k C(1/k)``; exact on reciprocal knots for grids."""
    curve = _as_grid(curve)
    if isinstance(curve, cs.GridCurve):
        ks = curve.knots()
        vals = np.array([curve.eval(float(k)) for k in ks])
        slopes = curve.slopes()
        inv_k = 1.0 / ks[1:][::-1]
        inv_c = 1.0 - inv_k + inv_k * vals[1:][::-1]
        # on each segment C*' = -1 + C(x) - x C'(x) with x = 1/k, a constant
        seg = -1.0 + vals[1:-1] - slopes[1:] * ks[1:-1]
        inv_s = np.concatenate(([-1.0 + vals[-1]], seg[::-1]))
        strikes = np.concatenate(([0.0], inv_k))
        prices = np.concatenate(([1.0], inv_c))
        # distinct close knots can share a reciprocal; drop the empty segments
        keep = np.concatenate(([True], np.diff(strikes) > 0))
        inv_s = inv_s[keep[1:]]
        strikes, prices = strikes[keep], prices[keep]
        c_inf = 1.0 + curve.right_derivative(0.0)
        return cs.GridCurve(strikes, prices, min(max(c_inf, 0.0), float(prices[-1])),
                            slopes=inv_s)
    return cs.InvolutedCurve(curve)


def leq(c1: cs.CallCurve, c2: cs.CallCurve, tol: float | None = None) -> bool:
    """Pointwise order ``C1 <= C2``.

    Exact on the merged knots for piecewise-linear curves; otherwise checked on
    the merged knots plus :data:`curvespace.SAMPLE_KAPPAS` and at infinity.
    """
    tol = get_tolerances().algebra if tol is None else tol
    k1, k2 = c1.knots(), c2.knots()
    parts = [a for a in (k1, k2) if a is not None]
    if k1 is None or k2 is None:
        parts.append(cs.SAMPLE_KAPPAS)
    grid = np.unique(np.concatenate(parts))
    if c1.c_inf > c2.c_inf + tol:
        return False
    return all(c1.eval(float(k)) <= c2.eval(float(k)) + tol for k in grid)


def hat_leq(g1: HatCurve, g2: HatCurve, tol: float | None = None) -> bool:
    """Pointwise order on conjugates, exact on merged knots for grids."""
    tol = get_tolerances().algebra if tol is None else tol
    parts = [g.ps for g in (g1, g2) if isinstance(g, GridHat)]
    if len(parts) < 2:
        parts.append(np.linspace(0.0, 1.0, 1001))
    ps = np.unique(np.concatenate(parts))
    return all(g1.value(float(p)) <= g2.value(float(p)) + tol for p in ps)


def countermonotone_price(primal1: cs.DiscreteDistribution,
                          dual2: cs.DiscreteDistribution, kappa: float) -> float:
    """``1 - E[S1 ^ kappa S2*]`` with ``S1`` and ``S2*`` countermonotonic.

    The coupling pairs ``u -> Q1(u)`` with ``u -> Q2*(1 - u)``; the expectation
    is an exact sum over the merged steps of the two quantile functions.
    """
    c1 = np.concatenate(([0.0], np.cumsum(primal1.probs)))
    c1[-1] = 1.0
    # descending quantile of S2*: atoms from largest to smallest
    a2 = dual2.atoms[::-1]
    c2 = np.concatenate(([0.0], np.cumsum(dual2.probs[::-1])))
    c2[-1] = 1.0
    us = np.unique(np.concatenate((c1, c2)))
    total = 0.0
    for u0, u1 in zip(us[:-1], us[1:]):
        if u1 <= u0:
            continue
        mid = 0.5 * (u0 + u1)
        i = min(int(np.searchsorted(c1, mid, side="right")) - 1, primal1.atoms.size - 1)
        j = min(int(np.searchsorted(c2, mid, side="right")) - 1, a2.size - 1)
        total += (u1 - u0) * min(primal1.atoms[i], kappa * a2[j])
    return 1.0 - total
