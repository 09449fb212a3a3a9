"""Small scalar search routines shared by the transforms."""
from __future__ import annotations

import math
from typing import Callable

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(fn: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-12, maxiter: int = 400) -> tuple[float, float]:
    """Minimise a unimodal function on ``[lo, hi]``.

    Returns ``(x, f(x))`` for the best point seen, endpoints included.
    """
    f_lo, f_hi = fn(lo), fn(hi)
    best_x, best_f = (lo, f_lo) if f_lo <= f_hi else (hi, f_hi)
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = fn(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def golden_max(fn: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-12, maxiter: int = 400) -> tuple[float, float]:
    x, negf = golden_min(lambda t: -fn(t), lo, hi, tol=tol, maxiter=maxiter)
    return x, -negf


def bisect_decreasing(pred: Callable[[float], bool], lo: float, hi: float,
                      tol: float = 1e-12, maxiter: int = 2000) -> float:
    """Boundary of a predicate that is true on the left and false on the right.

    ``pred(lo)`` must hold and ``pred(hi)`` must fail. The returned point is
    within ``tol`` of ``sup{x : pred(x)}``.
    """
    for _ in range(maxiter):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
