"""Normalised Black-Scholes call prices and implied total standard deviation.

Prices are quoted per unit forward and strikes as moneyness ``kappa = K/F``;
``y = sigma * sqrt(T)`` is the total standard deviation of the log price.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PriceBelowIntrinsic
from .normal import norm_cdf, norm_pdf, norm_ppf

Y_MAX = 50.0
"""Total standard deviations beyond this are reported as saturated (+inf)."""


@dataclass(frozen=True)
class BsPoint:
    kappa: float
    y: float
    price: float

    def __post_init__(self):
        if self.kappa <= 0 or self.y < 0:
            raise ValueError("need kappa > 0 and y >= 0")
        if not max(1.0 - self.kappa, 0.0) <= self.price < 1.0:
            raise PriceBelowIntrinsic(f"price {self.price} outside [(1-kappa)+, 1)")


def d(kappa: float, y: float) -> float:
    """``-log(kappa)/y - y/2``; the lower Black-Scholes threshold."""
    return -math.log(kappa) / y - 0.5 * y


def cbs(kappa: float, y: float) -> float:
    """Normalised call price ``C_BS(kappa, y)``.

    Branch order follows the definition: ``kappa == 0`` gives 1, ``y == 0``
    gives the intrinsic value, otherwise the closed form.
    """
    if kappa < 0 or y < 0:
        raise ValueError("cbs needs kappa >= 0 and y >= 0")
    if kappa == 0:
        return 1.0
    if y == 0:
        return max(1.0 - kappa, 0.0)
    if math.isinf(y):
        return 1.0
    lo = d(kappa, y)
    price = norm_cdf(lo + y) - kappa * norm_cdf(lo)
    # rounding must not push a tiny time value below intrinsic
    return min(max(price, 1.0 - kappa, 0.0), 1.0)


def vega_y(kappa: float, y: float) -> float:
    """Derivative of ``cbs`` in ``y``: ``phi(d + y)``."""
    return norm_pdf(d(kappa, y) + y)


@dataclass(frozen=True)
class ImpliedY:
    y: float
    saturated: bool = False


def _solve_otm(kappa: float, c: float) -> ImpliedY:
    # kappa >= 1 here, so the price is pure time value
    if c <= 0.0:
        return ImpliedY(0.0)

    def resid(y):
        return cbs(kappa, y) - c

    if resid(Y_MAX) < 0:
        return ImpliedY(math.inf, saturated=True)
    lo, hi = 0.0, Y_MAX
    # starting point from the bound Y <= Phi^{-1}(c + p kappa) - Phi^{-1}(p) at p = c
    y = min(max(norm_ppf(min(c + c * kappa, 1.0 - 1e-16)) - norm_ppf(c), 1e-3), Y_MAX)
    if not math.isfinite(y):
        y = 1.0
    for _ in range(100):
        r = resid(y)
        if r == 0.0:
            return ImpliedY(y)
        if r > 0:
            hi = min(hi, y)
        else:
            lo = max(lo, y)
        v = vega_y(kappa, y)
        step = r / v if v > 0 else math.inf
        nxt = y - step
        if not (lo < nxt < hi) or not math.isfinite(nxt):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - y) <= 1e-15 * max(1.0, y) or hi - lo <= 1e-15 * max(1.0, hi):
            return ImpliedY(nxt)
        y = nxt
    # bisection fallback
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return ImpliedY(0.5 * (lo + hi))


def implied_y(kappa: float, c: float) -> ImpliedY:
    """Implied total standard deviation with a saturation flag."""
    if kappa <= 0:
        raise ValueError("implied_y needs kappa > 0")
    intrinsic = max(1.0 - kappa, 0.0)
    if c < intrinsic:
        raise PriceBelowIntrinsic(f"price {c} below intrinsic value {intrinsic}")
    if c >= 1.0:
        return ImpliedY(math.inf, saturated=True)
    if kappa < 1.0:
        # put-call symmetry: C(k, y) = 1 - k + k C(1/k, y)
        return _solve_otm(1.0 / kappa, (c - 1.0 + kappa) / kappa)
    return _solve_otm(kappa, c)


def ybs(kappa: float, c: float) -> float:
    """Implied total standard deviation ``Y_BS(kappa, c)``; ``inf`` for ``c >= 1``."""
    return implied_y(kappa, c).y


def sifin_lower_bound(kappa: float, y: float, p: float) -> float:
    """Lower bound ``Phi(Phi^{-1}(p) + y) - p kappa`` on ``cbs(kappa, y)``."""
    return norm_cdf(norm_ppf(p) + y) - p * kappa


def sifin_equality(kappa: float, y: float, p: float, tol: float = 1e-10) -> bool:
    return abs(p - norm_cdf(d(kappa, y))) < tol


def sifin_upper_y(kappa: float, c: float, p: float) -> float:
    """Upper bound ``Phi^{-1}(c + p kappa) - Phi^{-1}(p)`` on ``ybs(kappa, c)``."""
    u = c + p * kappa
    if u >= 1.0:
        return math.inf
    return norm_ppf(u) - norm_ppf(p)


def bs_inequality_gap(kappa1: float, kappa2: float, y1: float, y2: float) -> float:
    """``C(k1, y1) + k1 C(k2, y2) - C(k1 k2, y1 + y2)``, nonnegative up to rounding."""
    return cbs(kappa1, y1) + kappa1 * cbs(kappa2, y2) - cbs(kappa1 * kappa2, y1 + y2)


def bs_equality(kappa1: float, kappa2: float, y1: float, y2: float, tol: float = 1e-8) -> bool:
    """Equality condition ``d(k1, y1) = d(k2, y2) + y2``."""
    return abs(d(kappa1, y1) - (d(kappa2, y2) + y2)) < tol


def implied_y_sum_gap(kappa1: float, c1: float, kappa2: float, c2: float) -> float:
    """``Y(k1k2, c1 + k1 c2) - Y(k1, c1) - Y(k2, c2)``, nonnegative up to rounding."""
    return ybs(kappa1 * kappa2, c1 + kappa1 * c2) - ybs(kappa1, c1) - ybs(kappa2, c2)
