"""Lift zonoids of nonnegative random variables.

The boundary of the lift zonoid of ``S`` is read off the conjugate of its call
curve: ``upper(p) = E S - 1 + hat(C)(p)`` and ``lower(p) = 1 - hat(C)(1 - p)``.
:func:`lift_zonoid_from_quantiles` computes the same boundaries as integrals of
the quantile function and serves as an independent check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import algebra
from . import curvespace as cs
from .errors import NotInC1

DEFAULT_PS = np.linspace(0.0, 1.0, 1001)
CONTAINS_TOL = 1e-12


@dataclass(frozen=True)
class LiftZonoid:
    ps: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    mean: float

    def __post_init__(self):
        for name in ("ps", "lower", "upper"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.ps.shape == self.lower.shape == self.upper.shape):
            raise ValueError("ps, lower and upper must have the same shape")
        if self.ps[0] != 0.0 or self.ps[-1] != 1.0 or np.any(np.diff(self.ps) <= 0):
            raise ValueError("ps must increase strictly from 0 to 1")

    def lower_at(self, p: float) -> float:
        return float(np.interp(p, self.ps, self.lower))

    def upper_at(self, p: float) -> float:
        return float(np.interp(p, self.ps, self.upper))

    def rows(self):
        return zip(self.ps.tolist(), self.lower.tolist(), self.upper.tolist())


def _grid(ps, extra=()) -> np.ndarray:
    ps = np.asarray(DEFAULT_PS if ps is None else ps, dtype=float)
    if np.any((ps < 0) | (ps > 1)):
        raise ValueError("ps must lie in [0, 1]")
    return np.unique(np.concatenate((ps, [0.0, 1.0], np.asarray(extra, dtype=float))))


def _hat_knots(g) -> np.ndarray:
    if isinstance(g, algebra.GridHat):
        return np.concatenate((g.ps, 1.0 - g.ps))
    return np.zeros(0)


def lift_zonoid_from_curve(curve: cs.CallCurve, ps: Sequence[float] | None = None) -> LiftZonoid:
    """Boundaries from the conjugate; the grid gains every knot of ``hat(C)``."""
    g = algebra.hat(curve)
    grid = _grid(ps, _hat_knots(g))
    mean = 1.0 - float(curve.c_inf)
    hv = g(grid)
    upper = mean - 1.0 + hv
    lower = 1.0 - g(1.0 - grid)
    upper[0], lower[0] = 0.0, 0.0
    upper[-1], lower[-1] = mean, mean
    return LiftZonoid(grid, lower, upper, mean)


def _top_mass_integral(atoms_desc: np.ndarray, cum: np.ndarray, p: float) -> float:
    """Integral over ``[0, p]`` of the step function taking ``atoms_desc[i]`` on
    ``[cum[i], cum[i+1])``."""
    total = 0.0
    for a, lo, hi in zip(atoms_desc, cum[:-1], cum[1:]):
        if lo >= p:
            break
        total += a * (min(hi, p) - lo)
    return total


def lift_zonoid_from_quantiles(dist: cs.DiscreteDistribution,
                               ps: Sequence[float] | None = None) -> LiftZonoid:
    """Exact step integrals of the upper quantile function of ``dist``.

    ``upper(p)`` integrates the largest mass-``p`` portion of the law and
    ``lower(p)`` the smallest.
    """
    grid = _grid(ps)
    desc = dist.atoms[::-1]
    cum_d = np.concatenate(([0.0], np.cumsum(dist.probs[::-1])))
    asc = dist.atoms
    cum_a = np.concatenate(([0.0], np.cumsum(dist.probs)))
    cum_d[-1] = cum_a[-1] = 1.0
    upper = np.array([_top_mass_integral(desc, cum_d, p) for p in grid])
    lower = np.array([_top_mass_integral(asc, cum_a, p) for p in grid])
    return LiftZonoid(grid, lower, upper, dist.mean)


def contains(z: LiftZonoid, p: float, q: float, tol: float = CONTAINS_TOL) -> bool:
    if not 0.0 <= p <= 1.0:
        return False
    return z.lower_at(p) - tol <= q <= z.upper_at(p) + tol


def zonoid_leq(c1: cs.CallCurve, c2: cs.CallCurve, ps: Sequence[float] | None = None,
               tol: float = CONTAINS_TOL) -> bool:
    """Inclusion of lift zonoids, compared on a grid holding both sets of hat knots."""
    for c in (c1, c2):
        if not cs.is_c1(c):
            raise NotInC1(f"{c!r} has c_inf = {c.c_inf!r}")
    g1, g2 = algebra.hat(c1), algebra.hat(c2)
    grid = _grid(ps, np.concatenate((_hat_knots(g1), _hat_knots(g2))))
    z1 = lift_zonoid_from_curve(c1, grid)
    z2 = lift_zonoid_from_curve(c2, grid)
    return bool(np.all(z1.upper <= z2.upper + tol) and np.all(z1.lower >= z2.lower - tol))
