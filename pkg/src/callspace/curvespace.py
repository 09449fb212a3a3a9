"""Call price curves.

A call price curve is a convex ``C: [0, inf) -> [0, 1]`` with ``C(0) = 1`` and
``C(kappa) >= (1 - kappa)^+``. Every such curve is ``1 - E[S ^ kappa]`` for a
nonnegative ``S`` with ``E[S] <= 1`` (the primal representation) and
``1 - E[1 ^ S* kappa]`` for another (the dual representation).

Curves come in four concrete flavours here: piecewise-linear grids, the two
special elements ``E`` (identity) and ``Z`` (absorbing), analytic surfaces
``C_f(., y)`` from a log-concave density, and lazily evaluated results of the
algebra (conjugates and involutions) that have no finite representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import logconcave as lc
from ._numerics import golden_max
from .config import get_tolerances
from .errors import InvalidCurve, MeanExceedsOne

SAMPLE_KAPPAS = np.concatenate(([0.0], np.logspace(-3, 3, 241)))
"""Evaluation grid for curves without a finite knot set."""


class CallCurve:
    """Base class. Subclasses implement ``eval``, ``right_derivative`` and ``c_inf``."""

    def eval(self, kappa: float) -> float:
        raise NotImplementedError

    def __call__(self, kappa):
        if np.ndim(kappa):
            return np.array([self.eval(float(k)) for k in np.ravel(kappa)]).reshape(np.shape(kappa))
        return self.eval(float(kappa))

    def right_derivative(self, kappa: float) -> float:
        raise NotImplementedError

    @property
    def c_inf(self) -> float:
        raise NotImplementedError

    def knots(self) -> np.ndarray | None:
        """Breakpoints if the curve is piecewise linear, else ``None``."""
        return None


class GridCurve(CallCurve):
    """Piecewise-linear curve through ``(strikes[i], prices[i])``.

    Past the last strike the final slope is continued until the level ``c_inf``
    is reached, and the curve is constant from there on.
    """

    def __init__(self, strikes: Sequence[float], prices: Sequence[float], c_inf: float,
                 slopes: Sequence[float] | None = None):
        ks = np.array(strikes, dtype=float)
        cs = np.array(prices, dtype=float)
        if ks.ndim != 1 or ks.shape != cs.shape or ks.size == 0:
            raise InvalidCurve("strikes and prices must be matching non-empty 1-d arrays")
        if ks[0] != 0.0:
            raise InvalidCurve("strikes[0] must be 0")
        if np.any(np.diff(ks) <= 0):
            raise InvalidCurve("strikes must be strictly increasing")
        if not (np.all(np.isfinite(ks)) and np.all(np.isfinite(cs)) and math.isfinite(c_inf)):
            raise InvalidCurve("strikes, prices and c_inf must be finite")
        ks.setflags(write=False)
        cs.setflags(write=False)
        self.strikes, self.prices = ks, cs
        self._c_inf = float(c_inf)
        self._extend()
        if slopes is not None:
            # exact segment slopes supplied by the caller (e.g. survival probabilities)
            exact = np.asarray(slopes, dtype=float)
            n = ks.size - 1
            if exact.shape != (n,) or np.any(np.abs(exact * np.diff(ks) - np.diff(cs)) > 1e-9):
                raise InvalidCurve("slopes disagree with the price differences")
            self._slopes = np.concatenate((exact, self._slopes[n:]))

    def _extend(self):
        ks, cs = self.strikes, self.prices
        if ks.size >= 2:
            s = (cs[-1] - cs[-2]) / (ks[-1] - ks[-2])
        else:
            s = 0.0
        ext_k, ext_c = list(ks), list(cs)
        if s < 0 and cs[-1] > self._c_inf:
            k_end = ks[-1] + (cs[-1] - self._c_inf) / (-s)
            if k_end > ks[-1]:
                ext_k.append(k_end)
                ext_c.append(self._c_inf)
        self._ks = np.array(ext_k)
        self._cs = np.array(ext_c)
        self._slopes = np.diff(self._cs) / np.diff(self._ks) if self._ks.size > 1 else np.zeros(0)

    def __repr__(self):
        return f"GridCurve(strikes={self.strikes.tolist()}, prices={self.prices.tolist()}, c_inf={self._c_inf})"

    def __eq__(self, other):
        return (isinstance(other, GridCurve) and np.array_equal(self.strikes, other.strikes)
                and np.array_equal(self.prices, other.prices) and self._c_inf == other._c_inf)

    __hash__ = None

    @property
    def c_inf(self):
        return self._c_inf

    def knots(self):
        return self._ks

    def eval(self, kappa):
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        if kappa >= self._ks[-1]:
            return float(self._cs[-1])
        return float(np.interp(kappa, self._ks, self._cs))

    def right_derivative(self, kappa):
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        i = int(np.searchsorted(self._ks, kappa, side="right")) - 1
        if i >= self._slopes.size:
            return 0.0
        return float(self._slopes[i])

    def slopes(self) -> np.ndarray:
        return self._slopes


class SpecialCurve(CallCurve):
    """``E(kappa) = (1 - kappa)^+`` or ``Z(kappa) = 1``."""

    def __init__(self, name: str):
        if name not in ("E", "Z"):
            raise InvalidCurve(f"unknown special curve {name!r}")
        self.name = name

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, SpecialCurve) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    def eval(self, kappa):
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        return max(1.0 - kappa, 0.0) if self.name == "E" else 1.0

    def right_derivative(self, kappa):
        if self.name == "E" and kappa < 1.0:
            return -1.0
        return 0.0

    @property
    def c_inf(self):
        return 0.0 if self.name == "E" else 1.0

    def knots(self):
        return np.array([0.0, 1.0]) if self.name == "E" else np.array([0.0])

    def as_grid(self) -> GridCurve:
        if self.name == "E":
            return GridCurve([0.0, 1.0], [1.0, 0.0], 0.0)
        return GridCurve([0.0], [1.0], 1.0)


E = SpecialCurve("E")
Z = SpecialCurve("Z")


class AnalyticCurve(CallCurve):
    """``C_f(., y)`` for a log-concave density ``f``.

    Negative ``y`` is allowed and gives the involution of ``C_f(., -y)``.
    """

    def __init__(self, density: lc.LogConcaveDensity, y: float):
        if not math.isfinite(y):
            raise InvalidCurve("y must be finite")
        self.density = density
        self.y = float(y)

    def __repr__(self):
        return f"AnalyticCurve({self.density!r}, y={self.y})"

    def eval(self, kappa):
        return lc.surface_price(self.density, kappa, self.y)

    def right_derivative(self, kappa):
        return -lc.surface_survival(self.density, kappa, self.y)

    @property
    def c_inf(self):
        return lc.surface_c_inf(self.density, self.y)


class InvolutedCurve(CallCurve):
    """``C*(kappa) = 1 - kappa + kappa C(1/kappa)`` evaluated on demand."""

    def __init__(self, base: CallCurve):
        self.base = base

    def __repr__(self):
        return f"InvolutedCurve({self.base!r})"

    def eval(self, kappa):
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        if kappa == 0:
            return 1.0
        return 1.0 - kappa + kappa * self.base.eval(1.0 / kappa)

    def right_derivative(self, kappa):
        if kappa == 0:
            return -1.0 + self.base.c_inf
        x = 1.0 / kappa
        return -1.0 + self.base.eval(x) - x * self.base.right_derivative(x)

    @property
    def c_inf(self):
        return 1.0 + self.base.right_derivative(0.0)


class ConjugateCurve(CallCurve):
    """``C(kappa) = max_p [g(p) - p kappa]`` for a concave conjugate ``g``."""

    def __init__(self, hat_curve):
        self.hat_curve = hat_curve

    def __repr__(self):
        return f"ConjugateCurve({self.hat_curve!r})"

    def _argmax(self, kappa):
        g = self.hat_curve
        return golden_max(lambda p: g(p) - p * kappa, 0.0, 1.0, tol=1e-15)

    def eval(self, kappa):
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        if kappa == 0:
            return 1.0
        _, v = self._argmax(kappa)
        return min(max(v, max(1.0 - kappa, 0.0), self.hat_curve(0.0)), 1.0)

    def right_derivative(self, kappa):
        p, _ = self._argmax(kappa)
        return -p

    @property
    def c_inf(self):
        return float(self.hat_curve(0.0))


@dataclass(frozen=True)
class Violation:
    invariant: str
    kappa: float | None
    detail: str = ""


def validate(curve: CallCurve, kappas: Sequence[float] | None = None,
             tol: float | None = None) -> list[Violation]:
    """List the invariants of a call price curve that fail.

    Grid curves are checked exactly on their knots; other curves on ``kappas``
    (default :data:`SAMPLE_KAPPAS`).
    """
    tol = get_tolerances().algebra if tol is None else tol
    out: list[Violation] = []
    c_inf = curve.c_inf
    if isinstance(curve, GridCurve):
        ks, cs = curve.strikes, curve.prices
    else:
        ks = np.asarray(SAMPLE_KAPPAS if kappas is None else kappas, dtype=float)
        cs = np.array([curve.eval(float(k)) for k in ks])
    if ks[0] == 0 and abs(cs[0] - 1.0) > tol:
        out.append(Violation("C(0)=1", 0.0, f"C(0) = {cs[0]!r}"))
    intrinsic = np.maximum(1.0 - ks, 0.0)
    for k, c, lo in zip(ks, cs, intrinsic):
        if c < lo - tol or c > 1.0 + tol:
            out.append(Violation("bounds", float(k), f"C = {c!r} outside [(1-k)+, 1]"))
    if ks.size >= 2:
        slopes = curve.slopes()[:ks.size - 1] if isinstance(curve, GridCurve) \
            else np.diff(cs) / np.diff(ks)
        for i, s in enumerate(slopes):
            if s > tol:
                out.append(Violation("nonincreasing", float(ks[i + 1]), f"slope {s!r} > 0"))
        if slopes[0] < -1.0 - tol:
            out.append(Violation("slope>=-1", float(ks[0]), f"slope {slopes[0]!r} < -1"))
        if isinstance(curve, GridCurve):
            for i in range(slopes.size - 1):
                if slopes[i] > slopes[i + 1] + tol:
                    out.append(Violation("convex", float(ks[i + 1]),
                                         f"slope {slopes[i]!r} > {slopes[i + 1]!r}"))
        else:
            # sampled prices: slope noise grows like eps/dk, so test the chord in price units
            for i in range(1, ks.size - 1):
                w = (ks[i] - ks[i - 1]) / (ks[i + 1] - ks[i - 1])
                chord = (1 - w) * cs[i - 1] + w * cs[i + 1]
                if cs[i] > chord + tol:
                    out.append(Violation("convex", float(ks[i]),
                                         f"C = {cs[i]!r} above chord {chord!r}"))
        last_slope = slopes[-1]
    else:
        last_slope = 0.0
    if not -tol <= c_inf <= 1.0 + tol:
        out.append(Violation("c_inf", None, f"c_inf = {c_inf!r} outside [0, 1]"))
    elif isinstance(curve, GridCurve):
        if c_inf > cs[-1] + tol:
            out.append(Violation("c_inf", float(ks[-1]), f"c_inf {c_inf!r} above last price"))
        elif last_slope >= -tol and cs[-1] > c_inf + tol:
            out.append(Violation("c_inf", float(ks[-1]),
                                 "flat tail never reaches c_inf"))
    elif cs.size and np.min(cs) < c_inf - 1e-9:
        out.append(Violation("c_inf", None, "curve dips below its limit"))
    return out


def eval_curve(curve: CallCurve, kappa: float) -> float:
    return curve.eval(kappa)


def right_derivative(curve: CallCurve, kappa: float) -> float:
    return curve.right_derivative(kappa)


def primal_survival(curve: CallCurve, kappa: float) -> float:
    """``P(S > kappa) = -C'(kappa)`` for the primal representation ``S``."""
    return -curve.right_derivative(kappa)


def dual_cdf(curve: CallCurve, kappa: float) -> float:
    """``P(S* < 1/kappa) = C(kappa) - kappa C'(kappa)`` for the dual representation."""
    if not kappa > 0:
        raise ValueError("dual_cdf needs kappa > 0")
    v = curve.eval(kappa) - kappa * curve.right_derivative(kappa)
    return min(max(v, 0.0), 1.0)


def is_c1(curve: CallCurve, tol: float | None = None) -> bool:
    """``C(inf) = 0``: the primal representation has mean one."""
    tol = get_tolerances().algebra if tol is None else tol
    return abs(curve.c_inf) <= tol


def is_cplus(curve: CallCurve, tol: float | None = None) -> bool:
    """``C'(0) = -1``: the dual representation has mean one."""
    tol = get_tolerances().algebra if tol is None else tol
    return abs(curve.right_derivative(0.0) + 1.0) <= tol


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely many nonnegative atoms; duplicates are merged on construction."""

    atoms: np.ndarray
    probs: np.ndarray

    def __init__(self, atoms: Sequence[float], probs: Sequence[float]):
        a = np.asarray(atoms, dtype=float)
        q = np.asarray(probs, dtype=float)
        if a.ndim != 1 or a.shape != q.shape or a.size == 0:
            raise ValueError("atoms and probs must be matching non-empty 1-d arrays")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValueError("atoms must be finite and nonnegative")
        if np.any(q <= 0):
            raise ValueError("probabilities must be positive")
        if abs(q.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {q.sum()!r}, not 1")
        uniq, inv = np.unique(a, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, q)
        uniq.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "atoms", uniq)
        object.__setattr__(self, "probs", merged)

    @property
    def mean(self) -> float:
        return float(np.dot(self.atoms, self.probs))

    def survival(self, x: float) -> float:
        return float(self.probs[self.atoms > x].sum())


def curve_of(dist: DiscreteDistribution) -> GridCurve:
    """The curve ``1 - E[S ^ kappa]``, exact on knots at 0 and every atom."""
    mean = dist.mean
    if mean > 1.0 + 1e-12:
        raise MeanExceedsOne(f"mean {mean!r} exceeds 1")
    ks = np.unique(np.concatenate(([0.0], dist.atoms)))
    prices = np.array([1.0 - float(np.dot(dist.probs, np.minimum(dist.atoms, k))) for k in ks])
    survival = [-dist.survival(k) for k in ks[:-1]]
    return GridCurve(ks, prices, max(1.0 - mean, 0.0), slopes=survival)


def dual_distribution(dist: DiscreteDistribution) -> DiscreteDistribution:
    """Law of the dual representation ``S*`` of ``curve_of(dist)``.

    ``S* = 1/S`` under the size-biased measure, plus an atom at 0 carrying
    the mass ``1 - E[S]``.
    """
    pos = dist.atoms > 0
    atoms = list(1.0 / dist.atoms[pos])
    probs = list(dist.atoms[pos] * dist.probs[pos])
    rest = 1.0 - float(sum(probs))
    if rest > 1e-15:
        atoms.append(0.0)
        probs.append(rest)
    probs = np.asarray(probs)
    return DiscreteDistribution(atoms, probs / probs.sum())


def to_grid(curve: CallCurve, kappas: Sequence[float]) -> GridCurve:
    """Piecewise-linear interpolant of ``curve`` on ``kappas`` (0 is added)."""
    if isinstance(curve, GridCurve):
        return curve
    if isinstance(curve, SpecialCurve):
        return curve.as_grid()
    ks = np.unique(np.concatenate(([0.0], np.asarray(kappas, dtype=float))))
    cs = np.array([curve.eval(float(k)) for k in ks])
    cs[0] = 1.0
    return GridCurve(ks, cs, min(curve.c_inf, float(cs[-1])))
