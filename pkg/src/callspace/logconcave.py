"""Log-concave densities and the call surfaces they generate.

For a log-concave density ``f`` with distribution function ``F`` the surface

    C_f(kappa, y) = integral of (f(z + y) - kappa f(z))^+ dz

is a one-parameter semigroup of call price curves whose concave conjugate is
``F(F^{-1}(p) + y)``. The generator of that semigroup is ``f o F^{-1}``, and
:func:`reconstruct` goes back from a generator to a density.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import expit, logit

from ._numerics import bisect_decreasing, golden_max
from .blackscholes import ybs
from .errors import (NonConcaveInput, NotApplicable, NotConcave,
                     QuadratureFailure, UnknownFamily)
from .normal import norm_cdf, norm_ppf

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_BRACKET_LIMIT = 1e8
QUAD_TOL = 1e-10


class LogConcaveDensity:
    """Interface shared by builtin, tabulated and reconstructed densities.

    Subclasses provide scalar ``logpdf``, ``cdf``, ``sf`` and ``ppf`` plus the
    support ``(L, R)``. ``pdf`` is the version continuous on the closed support.
    """

    family: str = "custom"
    strict: bool = False
    symmetric: bool = False

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def logpdf(self, z: float) -> float:
        raise NotImplementedError

    def cdf(self, z: float) -> float:
        raise NotImplementedError

    def sf(self, z: float) -> float:
        return 1.0 - self.cdf(z)

    def ppf(self, p: float) -> float:
        raise NotImplementedError

    def pdf(self, z: float) -> float:
        if math.isinf(z):
            return 0.0
        lf = self.logpdf(z)
        return 0.0 if lf == -math.inf else math.exp(lf)

    def kinks(self) -> tuple[float, ...]:
        """Points where ``logpdf`` is not differentiable inside the support."""
        return ()

    def log_ratio(self, z: float, y: float) -> float:
        """``log f(z + y) - log f(z)`` for ``z`` inside the support."""
        return self.logpdf(z + y) - self.logpdf(z)

    def params(self) -> dict:
        return {}


# standardised builtin families -------------------------------------------

def _gumbel_logpdf(z):
    if z > 700:
        return -math.inf
    return z - math.exp(z)


def _gumbel_log_ratio(z, y):
    # y - e^z (e^y - 1); the product is formed in log space to avoid overflow
    if y == 0:
        return 0.0
    if y > 0:
        t = z + y + math.log(-math.expm1(-y))
        return y - math.exp(t) if t < 709 else -math.inf
    t = z + math.log(-math.expm1(y))
    return y + math.exp(t) if t < 709 else math.inf


def _logistic_logpdf(z):
    a = abs(z)
    return -a - 2.0 * math.log1p(math.exp(-a))


def _laplace_cdf(z):
    return 0.5 * math.exp(z) if z < 0 else 1.0 - 0.5 * math.exp(-z)


def _laplace_ppf(p):
    if p <= 0:
        return -math.inf
    if p >= 1:
        return math.inf
    return math.log(2.0 * p) if p < 0.5 else -math.log(2.0 * (1.0 - p))


def _exp_logpdf(z):
    return -z if z >= 0 else -math.inf


def _unif_logpdf(z):
    return 0.0 if 0.0 <= z <= 1.0 else -math.inf


def _safe_log(x):
    return math.log(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class _Family:
    logpdf: Callable[[float], float]
    cdf: Callable[[float], float]
    sf: Callable[[float], float]
    ppf: Callable[[float], float]
    support: tuple[float, float]
    strict: bool
    symmetric: bool
    kinks: tuple[float, ...] = ()
    log_ratio: Callable[[float, float], float] | None = None


_FAMILIES: dict[str, _Family] = {
    "normal": _Family(
        logpdf=lambda z: -0.5 * z * z - LOG_SQRT_2PI,
        cdf=norm_cdf,
        sf=lambda z: norm_cdf(-z),
        ppf=norm_ppf,
        support=(-math.inf, math.inf),
        strict=True,
        symmetric=True,
        log_ratio=lambda z, y: -z * y - 0.5 * y * y,
    ),
    "gumbel": _Family(
        logpdf=_gumbel_logpdf,
        cdf=lambda z: -math.expm1(-math.exp(z)) if z < 700 else 1.0,
        sf=lambda z: math.exp(-math.exp(z)) if z < 700 else 0.0,
        ppf=lambda p: (-math.inf if p <= 0 else math.inf if p >= 1
                       else math.log(-math.log1p(-p))),
        support=(-math.inf, math.inf),
        strict=True,
        symmetric=False,
        log_ratio=lambda z, y: _gumbel_log_ratio(z, y),
    ),
    "logistic": _Family(
        logpdf=_logistic_logpdf,
        cdf=lambda z: float(expit(z)),
        sf=lambda z: float(expit(-z)),
        ppf=lambda p: float(logit(p)),
        support=(-math.inf, math.inf),
        strict=True,
        symmetric=True,
    ),
    "laplace": _Family(
        logpdf=lambda z: -abs(z) - math.log(2.0),
        cdf=_laplace_cdf,
        sf=lambda z: _laplace_cdf(-z),
        ppf=_laplace_ppf,
        support=(-math.inf, math.inf),
        strict=False,
        symmetric=True,
        kinks=(0.0,),
    ),
    "exponential": _Family(
        logpdf=_exp_logpdf,
        cdf=lambda z: -math.expm1(-z) if z > 0 else 0.0,
        sf=lambda z: math.exp(-z) if z > 0 else 1.0,
        ppf=lambda p: math.inf if p >= 1 else -math.log1p(-p),
        support=(0.0, math.inf),
        strict=False,
        symmetric=False,
    ),
    "uniform": _Family(
        logpdf=_unif_logpdf,
        cdf=lambda z: min(max(z, 0.0), 1.0),
        sf=lambda z: min(max(1.0 - z, 0.0), 1.0),
        ppf=lambda p: min(max(p, 0.0), 1.0),
        support=(0.0, 1.0),
        strict=False,
        symmetric=True,
    ),
}

FAMILIES = tuple(_FAMILIES)
BOUNDARY_FAMILIES = ("laplace", "uniform")


class BuiltinDensity(LogConcaveDensity):
    """Location-scale member of one of the closed-form families."""

    def __init__(self, family: str, loc: float = 0.0, scale: float = 1.0):
        if family not in _FAMILIES:
            raise UnknownFamily(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.family = family
        self.loc = float(loc)
        self.scale = float(scale)
        self._fam = _FAMILIES[family]
        self.strict = self._fam.strict
        self.symmetric = self._fam.symmetric
        self._logscale = math.log(self.scale)

    def __repr__(self):
        return f"BuiltinDensity({self.family!r}, loc={self.loc}, scale={self.scale})"

    def __eq__(self, other):
        return (isinstance(other, BuiltinDensity) and self.family == other.family
                and self.loc == other.loc and self.scale == other.scale)

    def __hash__(self):
        return hash((self.family, self.loc, self.scale))

    def _std(self, z):
        return (z - self.loc) / self.scale

    @property
    def support(self):
        lo, hi = self._fam.support
        return self.loc + self.scale * lo, self.loc + self.scale * hi

    def logpdf(self, z):
        return self._fam.logpdf(self._std(z)) - self._logscale

    def cdf(self, z):
        return self._fam.cdf(self._std(z))

    def sf(self, z):
        return self._fam.sf(self._std(z))

    def ppf(self, p):
        return self.loc + self.scale * self._fam.ppf(p)

    def kinks(self):
        return tuple(self.loc + self.scale * k for k in self._fam.kinks)

    def log_ratio(self, z, y):
        if self._fam.log_ratio is not None:
            return self._fam.log_ratio(self._std(z), y / self.scale)
        return self.logpdf(z + y) - self.logpdf(z)

    def params(self):
        return {"loc": self.loc, "scale": self.scale}


def builtin(family: str, params: dict | None = None) -> BuiltinDensity:
    """Construct a builtin family from a parameter mapping.

    Accepts ``loc``/``scale`` for every family, plus ``mu``/``sigma`` for the
    normal, ``rate`` for the exponential and ``a``/``b`` for the uniform.
    """
    params = dict(params or {})
    if family == "normal":
        loc = params.pop("mu", params.pop("loc", 0.0))
        scale = params.pop("sigma", params.pop("scale", 1.0))
    elif family == "exponential":
        loc = params.pop("loc", 0.0)
        scale = 1.0 / params.pop("rate") if "rate" in params else params.pop("scale", 1.0)
    elif family == "uniform" and ("a" in params or "b" in params):
        a, b = params.pop("a", 0.0), params.pop("b", 1.0)
        if not b > a:
            raise ValueError("uniform needs a < b")
        loc, scale = a, b - a
    else:
        loc = params.pop("loc", 0.0)
        scale = params.pop("scale", 1.0)
    if family in _FAMILIES and params:
        raise ValueError(f"unexpected parameters for {family}: {sorted(params)}")
    return BuiltinDensity(family, loc, scale)


def scaled(f: BuiltinDensity, r: float) -> BuiltinDensity:
    """The density ``z -> r f(r z)``."""
    return BuiltinDensity(f.family, f.loc / r, f.scale / r)


class TabulatedDensity(LogConcaveDensity):
    """Density with piecewise-linear ``log f`` on ``[z[0], z[-1]]``, normalised."""

    def __init__(self, z: Sequence[float], logf: Sequence[float]):
        z = np.asarray(z, dtype=float)
        lf = np.asarray(logf, dtype=float)
        if z.ndim != 1 or z.shape != lf.shape or z.size < 2:
            raise ValueError("need matching 1-d grids with at least two points")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z grid must be strictly increasing")
        slopes = np.diff(lf) / np.diff(z)
        if np.any(np.diff(slopes) > 1e-10):
            raise NotConcave("tabulated log-density is not concave")
        self._z, self._slopes = z, slopes
        masses = np.array([self._seg_mass(i, lf[i], z[i + 1] - z[i]) for i in range(z.size - 1)])
        shift = math.log(masses.sum())
        self._lf = lf - shift
        self._mass = masses / masses.sum()
        self._cum = np.concatenate(([0.0], np.cumsum(self._mass)))
        self._cum[-1] = 1.0

    def _seg_mass(self, i, l0, width):
        b = self._slopes[i]
        if abs(b * width) < 1e-12:
            return math.exp(l0) * width
        return math.exp(l0) * math.expm1(b * width) / b

    @property
    def support(self):
        return float(self._z[0]), float(self._z[-1])

    def _seg(self, z):
        return int(min(max(np.searchsorted(self._z, z, side="right") - 1, 0), self._z.size - 2))

    def logpdf(self, z):
        if not self._z[0] <= z <= self._z[-1]:
            return -math.inf
        i = self._seg(z)
        return float(self._lf[i] + self._slopes[i] * (z - self._z[i]))

    def kinks(self):
        return tuple(float(v) for v in self._z[1:-1])

    def cdf(self, z):
        if z <= self._z[0]:
            return 0.0
        if z >= self._z[-1]:
            return 1.0
        i = self._seg(z)
        return float(self._cum[i] + self._seg_mass(i, self._lf[i], z - self._z[i]))

    def ppf(self, p):
        if p <= 0:
            return float(self._z[0])
        if p >= 1:
            return float(self._z[-1])
        i = int(min(np.searchsorted(self._cum, p, side="right") - 1, self._z.size - 2))
        m = p - self._cum[i]
        b, e0 = self._slopes[i], math.exp(self._lf[i])
        if abs(b) < 1e-14:
            return float(self._z[i] + m / e0)
        return float(self._z[i] + math.log1p(m * b / e0) / b)


# the surface C_f -----------------------------------------------------------

def _ratio_exceeds(f: LogConcaveDensity, z: float, y: float, logk: float) -> bool:
    lr = f.log_ratio(z, y)
    return lr > logk


def threshold(f: LogConcaveDensity, kappa: float, y: float) -> float:
    """Boundary of ``{z : f(z + y)/f(z) > kappa}`` inside the support.

    For ``y > 0`` the set is an interval ``(L, d)`` and ``d`` is returned; for
    ``y < 0`` it is ``(d, R)``. The result may be ``L``, ``R`` or infinite.
    """
    L, R = f.support
    logk = math.log(kappa)
    sign = 1.0 if y > 0 else -1.0

    def left_true(z):
        hit = _ratio_exceeds(f, z, y, logk)
        return hit if sign > 0 else not hit

    # bracket from the left end
    if math.isfinite(L):
        lo = L
        if not left_true(lo):
            return L
    else:
        lo = min(-1.0, R - 1.0) if math.isfinite(R) else -1.0
        while not left_true(lo):
            # past the last atom of mass the ratio is rounding noise
            if lo < -_BRACKET_LIMIT or f.cdf(lo + abs(y)) == 0.0:
                return -math.inf
            lo *= 2.0
    if math.isfinite(R):
        hi = R
        if left_true(hi):
            return R
    else:
        hi = max(1.0, lo + 1.0)
        while left_true(hi):
            if hi > _BRACKET_LIMIT or f.sf(hi - abs(y)) == 0.0:
                return math.inf
            hi = 2.0 * hi if hi > 0 else hi + 1.0
    return bisect_decreasing(left_true, lo, hi, tol=1e-15)


def d_root(f: LogConcaveDensity, kappa: float, y: float) -> float:
    """Unique root of ``f(d + y)/f(d) = kappa``.

    Requires a strictly monotone likelihood ratio whose range brackets ``kappa``.
    """
    if not kappa > 0:
        raise ValueError("d_root needs kappa > 0")
    if y == 0:
        raise NotApplicable("likelihood ratio is constant for y = 0")
    if not f.strict:
        raise NotApplicable(f"{f.family} has a non-strict likelihood ratio")
    d = threshold(f, kappa, y)
    L, R = f.support
    if not (L < d < R):
        raise NotApplicable(f"ratio range does not bracket kappa={kappa}")
    return d


def _price_from_threshold(f, kappa, y, dd):
    if y > 0:
        return f.cdf(dd + y) - kappa * f.cdf(dd) if math.isfinite(dd) else (
            0.0 if dd < 0 else 1.0 - kappa)
    if math.isfinite(dd):
        return f.sf(dd + y) - kappa * f.sf(dd)
    return 1.0 - kappa if dd < 0 else 0.0


def _price_by_quadrature(f: LogConcaveDensity, kappa: float, y: float) -> float:
    L, R = f.support
    lo, hi = max(L, L - y), min(R, R - y)
    if not lo < hi:
        return 1.0
    cuts = set()
    for k in f.kinks():
        cuts.update((k, k - y))
    try:
        dd = threshold(f, kappa, y)
        cuts.add(dd)
    except (ValueError, OverflowError):
        pass
    inner = sorted(c for c in cuts if math.isfinite(c) and lo < c < hi)
    a = lo if math.isfinite(lo) else (inner[0] if inner else 0.0) - 1.0
    b = hi if math.isfinite(hi) else (inner[-1] if inner else 0.0) + 1.0
    a, b = min(a, b), max(a, b)
    nodes = [a] + [c for c in inner if a < c < b] + [b]

    def integrand(z):
        return min(f.pdf(z + y), kappa * f.pdf(z))

    total, err = 0.0, 0.0
    pieces = list(zip(nodes[:-1], nodes[1:]))
    if not math.isfinite(lo):
        pieces.insert(0, (-math.inf, a))
    if not math.isfinite(hi):
        pieces.append((b, math.inf))
    for u, v in pieces:
        if u == v:
            continue
        val, e = integrate.quad(integrand, u, v, epsabs=1e-13, epsrel=1e-12, limit=400)
        total += val
        err += e
    if err > QUAD_TOL:
        raise QuadratureFailure(f"quadrature error estimate {err:.3g} exceeds {QUAD_TOL}")
    return 1.0 - total


def surface_price(f: LogConcaveDensity, kappa: float, y: float, method: str = "auto") -> float:
    """``C_f(kappa, y)``.

    ``method="threshold"`` uses ``F(d + y) - kappa F(d)`` with the likelihood
    ratio threshold ``d``; ``"quadrature"`` integrates ``min(f(z+y), kappa f(z))``.
    ``"auto"`` picks the threshold route for strictly log-concave families.
    """
    if kappa < 0:
        raise ValueError("surface_price needs kappa >= 0")
    if kappa == 0:
        return 1.0
    if y == 0:
        return max(1.0 - kappa, 0.0)
    if method == "auto":
        method = "threshold" if f.strict else "quadrature"
    if method == "quadrature":
        price = _price_by_quadrature(f, kappa, y)
    elif method == "threshold":
        price = _price_from_threshold(f, kappa, y, threshold(f, kappa, y))
    else:
        raise ValueError(f"unknown method {method!r}")
    return min(max(price, max(1.0 - kappa, 0.0)), 1.0)


def surface_survival(f: LogConcaveDensity, kappa: float, y: float) -> float:
    """``P(S > kappa)`` for ``S = f(Z + y)/f(Z)``, i.e. minus the right slope of ``C_f``."""
    if y == 0:
        return 1.0 if kappa < 1 else 0.0
    if kappa <= 0:
        L, R = f.support
        # P(S > 0) = P(Z + y < R) for y > 0, P(Z + y > L) for y < 0
        return f.cdf(R - y) if y > 0 else f.sf(L - y)
    dd = threshold(f, kappa, y)
    if y > 0:
        return f.cdf(dd) if math.isfinite(dd) else (0.0 if dd < 0 else 1.0)
    return f.sf(dd) if math.isfinite(dd) else (1.0 if dd < 0 else 0.0)


def surface_c_inf(f: LogConcaveDensity, y: float) -> float:
    """``C_f(inf, y) = 1 - E[S]`` with ``E[S] = F(R + y) - F(L + y)``."""
    L, R = f.support
    mean = f.cdf(R + y) - f.cdf(L + y)
    return min(max(1.0 - mean, 0.0), 1.0)


def hat_surface(f: LogConcaveDensity, p: float, y: float) -> float:
    """``F(F^{-1}(p) + y)``; negative ``y`` needs support on the whole line."""
    if y < 0:
        L, R = f.support
        if math.isfinite(L) or math.isfinite(R):
            raise NotApplicable("negative y needs a density supported on the whole line")
    if p <= 0:
        return f.cdf(f.support[0] + y)
    if p >= 1:
        return 1.0
    return f.cdf(f.ppf(p) + y)


def hat_surface_value(f: LogConcaveDensity, p: float, y: float) -> float:
    """Concave conjugate of ``C_f(., y)`` at ``p`` for any real ``y``.

    For ``y < 0`` this is ``1 - F(F^{-1}(1 - p) + y)``.
    """
    if y >= 0:
        if p <= 0:
            return surface_c_inf(f, y)
        return hat_surface(f, p, y)
    q = 1.0 - p
    if q >= 1:
        return 0.0 if math.isinf(f.support[1]) else 1.0 - f.cdf(f.support[1] + y)
    if q <= 0:
        return 1.0
    return 1.0 - f.cdf(f.ppf(q) + y)


# generators -----------------------------------------------------------------

def generator_hat(f: LogConcaveDensity) -> Callable[[float], float]:
    """``p -> f(F^{-1}(p))`` with the endpoint values ``f(L)`` and ``f(R)``."""
    L, R = f.support

    def hat_h(p: float) -> float:
        if p <= 0:
            return f.pdf(L)
        if p >= 1:
            return f.pdf(R)
        return f.pdf(f.ppf(p))

    return hat_h


def _check_concave(hat_h, n: int = 257, tol: float = 1e-9, exc=NotConcave):
    ps = np.linspace(0.0, 1.0, n)
    vals = np.array([hat_h(float(p)) for p in ps])
    if np.any(~np.isfinite(vals)) or np.any(vals < -tol):
        raise exc("generator must be finite and nonnegative on [0, 1]")
    if np.any(np.diff(vals, 2) > tol * max(1.0, float(np.max(np.abs(vals))))):
        raise exc("generator is not concave")
    return ps, vals


@dataclass(frozen=True)
class GeneratorPair:
    """A concave generator ``hat_h`` and its convex conjugate ``H``.

    ``H(x) = sup_p [hat_h(p) - p x]``; ``a = lim H(x)`` as ``x -> +inf`` and
    ``b = lim H(x) + x`` as ``x -> -inf``.
    """

    hat_h: Callable[[float], float]
    a: float
    b: float
    ps: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def H(self, x: float) -> float:
        if self.ps is not None:
            return float(np.max(self.values - self.ps * x))
        _, v = golden_max(lambda p: self.hat_h(p) - p * x, 0.0, 1.0, tol=1e-13)
        return max(v, self.a, self.b - x)


def generator_H(hat_h, ps: Sequence[float] | None = None) -> GeneratorPair:
    """Conjugate pair for a concave generator.

    ``hat_h`` is either a callable on ``[0, 1]`` or, with ``ps`` given, the
    values of a piecewise-linear generator at the nodes ``ps``.
    """
    if ps is not None:
        ps_arr = np.asarray(ps, dtype=float)
        vals = np.asarray(hat_h, dtype=float)
        if ps_arr[0] != 0.0 or ps_arr[-1] != 1.0 or np.any(np.diff(ps_arr) <= 0):
            raise ValueError("generator nodes must increase from 0 to 1")
        if np.any(vals < 0):
            raise NotConcave("generator must be nonnegative")
        slopes = np.diff(vals) / np.diff(ps_arr)
        if np.any(np.diff(slopes) > 1e-12):
            raise NotConcave("generator is not concave")
        fn = lambda p: float(np.interp(p, ps_arr, vals))  # noqa: E731
        return GeneratorPair(fn, float(vals[0]), float(vals[-1]), ps_arr, vals)
    _check_concave(hat_h)
    return GeneratorPair(hat_h, float(hat_h(0.0)), float(hat_h(1.0)))


class TrivialSemigroup:
    """Marker for the generator ``hat_h = 0``: every curve is the identity."""

    def __repr__(self):
        return "TrivialSemigroup()"


TRIVIAL = TrivialSemigroup()

_PROBE_S = (6.0, 12.0, 18.0, 24.0)
_DIVERGENCE_RATIO = 0.5


class ReconstructedDensity(LogConcaveDensity):
    """Density recovered from a generator, anchored so that ``F(0) = 1/2``.

    ``F^{-1}(p) = G(p) = integral from 1/2 to p of 1/hat_h``, evaluated in the
    log-odds variable ``s = logit(p)`` where the integrand
    ``p(1 - p)/hat_h(p)`` stays bounded for every concave generator.
    """

    family = "reconstructed"

    def __init__(self, hat_h: Callable[[float], float]):
        self.hat_h = hat_h
        self._L = -self._end_integral(-1.0)
        self._R = self._end_integral(1.0)

    def _h(self, s: float) -> float:
        p = float(expit(s))
        q = float(expit(-s))
        hv = self.hat_h(p)
        # hv == 0 only where p has rounded onto an endpoint
        return p * q / hv if hv > 0 else 0.0

    def _quad(self, a: float, b: float, strict: bool = True) -> float:
        if a == b:
            return 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(self._h, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)
        if strict and err > QUAD_TOL:
            raise QuadratureFailure(f"generator integral error {err:.3g}")
        return val

    def _end_integral(self, direction: float) -> float:
        # integral from 0 to +-inf in log-odds. Convergent tails decay
        # geometrically over equal windows; divergent ones do not.
        svals = [0.0] + [direction * s for s in _PROBE_S]
        # probes only classify the tail; rounding of p near 1 makes them noisy
        incs = [abs(self._quad(a, b, strict=False)) for a, b in zip(svals[:-1], svals[1:])]
        if incs[-1] > 1e-13 and incs[-1] > _DIVERGENCE_RATIO * incs[-2]:
            return math.inf
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(self._h, 0.0, direction * math.inf,
                                    epsabs=1e-13, epsrel=1e-12, limit=400)
        return abs(val)

    @property
    def support(self):
        return self._L, self._R

    def ppf(self, p):
        if p <= 0:
            return self._L
        if p >= 1:
            return self._R
        return self._quad(0.0, float(logit(p)))

    def _solve_s(self, z: float) -> float:
        s, g = 0.0, 0.0
        lo, hi = -math.inf, math.inf
        for _ in range(200):
            h = self._h(s)
            if g < z:
                lo = s
            else:
                hi = s
            step = (z - g) / h if h > 0 and math.isfinite(h) else math.copysign(1.0, z - g)
            nxt = s + step
            if not lo < nxt < hi:
                if math.isfinite(lo) and math.isfinite(hi):
                    nxt = 0.5 * (lo + hi)
                else:
                    nxt = s + math.copysign(min(abs(step), 8.0) if math.isfinite(step) else 8.0, z - g)
            g += self._quad(s, nxt)
            if abs(nxt - s) < 1e-13 * max(1.0, abs(s)):
                return nxt
            s = nxt
        return s

    def cdf(self, z):
        if z <= self._L:
            return 0.0
        if z >= self._R:
            return 1.0
        return float(expit(self._solve_s(z)))

    def sf(self, z):
        if z <= self._L:
            return 1.0
        if z >= self._R:
            return 0.0
        return float(expit(-self._solve_s(z)))

    def pdf(self, z):
        if z < self._L or z > self._R:
            return 0.0
        return self.hat_h(self.cdf(z))

    def logpdf(self, z):
        return _safe_log(self.pdf(z))


def _seg_integral(h0: float, beta: float, width: float) -> float:
    """Integral of ``1 / (h0 + beta t)`` for ``t`` in ``[0, width]``, ``h0 > 0``."""
    x = beta * width / h0
    if x <= -1.0:
        return math.inf
    return width / h0 * (math.log1p(x) / x if abs(x) > 1e-300 else 1.0)


class PiecewiseLinearReconstruction(LogConcaveDensity):
    """Exact reconstruction from a piecewise-linear generator.

    On each generator segment the density is log-linear, so ``F``, ``F^{-1}``
    and ``f`` have closed forms and no quadrature is needed.
    """

    family = "reconstructed"

    def __init__(self, ps: np.ndarray, values: np.ndarray):
        ps = np.asarray(ps, dtype=float)
        hs = np.clip(np.asarray(values, dtype=float), 0.0, None)
        if not np.any(ps == 0.5):
            i = int(np.searchsorted(ps, 0.5))
            ps = np.insert(ps, i, 0.5)
            hs = np.insert(hs, i, float(np.interp(0.5, ps[np.arange(ps.size) != i],
                                                  hs)))
        self.ps, self.hs = ps, hs
        self.betas = np.diff(hs) / np.diff(ps)
        mid = int(np.flatnonzero(ps == 0.5)[0])
        gs = np.zeros(ps.size)
        for i in range(mid, ps.size - 1):
            gs[i + 1] = gs[i] + self._forward(i, ps[i + 1] - ps[i])
        for i in range(mid - 1, -1, -1):
            gs[i] = gs[i + 1] - self._backward(i, ps[i + 1] - ps[i])
        self.gs = gs

    def _forward(self, i: int, width: float) -> float:
        # from the left knot of segment i
        if self.hs[i] == 0.0:
            return math.inf
        return _seg_integral(self.hs[i], self.betas[i], width)

    def _backward(self, i: int, width: float) -> float:
        # towards the left from the right knot of segment i
        if self.hs[i + 1] == 0.0:
            return math.inf
        return _seg_integral(self.hs[i + 1], -self.betas[i], width)

    @property
    def support(self):
        return float(self.gs[0]), float(self.gs[-1])

    def kinks(self):
        return tuple(float(g) for g in self.gs[1:-1])

    def ppf(self, p):
        if p <= 0:
            return float(self.gs[0])
        if p >= 1:
            return float(self.gs[-1])
        i = min(int(np.searchsorted(self.ps, p, side="right")) - 1, self.ps.size - 2)
        if math.isfinite(self.gs[i]):
            return float(self.gs[i] + self._forward(i, p - self.ps[i]))
        return float(self.gs[i + 1] - self._backward(i, self.ps[i + 1] - p))

    def _locate(self, z: float):
        """Segment index and the signed offset ``p - p_base`` from a finite base knot."""
        i = min(max(int(np.searchsorted(self.gs, z, side="right")) - 1, 0), self.ps.size - 2)
        b = self.betas[i]
        base = i if math.isfinite(self.gs[i]) else i + 1
        dz = z - self.gs[base]
        h = self.hs[base]
        step = h * dz if b == 0.0 else h * math.expm1(b * dz) / b
        return base, step

    def cdf(self, z):
        L, R = self.support
        if z <= L:
            return 0.0
        if z >= R:
            return 1.0
        base, step = self._locate(z)
        return float(min(max(self.ps[base] + step, 0.0), 1.0))

    def sf(self, z):
        L, R = self.support
        if z <= L:
            return 1.0
        if z >= R:
            return 0.0
        base, step = self._locate(z)
        return float(min(max((1.0 - self.ps[base]) - step, 0.0), 1.0))

    def pdf(self, z):
        L, R = self.support
        if z < L or z > R or math.isinf(z):
            return 0.0
        i = min(max(int(np.searchsorted(self.gs, z, side="right")) - 1, 0), self.ps.size - 2)
        base = i if math.isfinite(self.gs[i]) else i + 1
        return float(self.hs[base] * math.exp(self.betas[i] * (z - self.gs[base])))

    def logpdf(self, z):
        return _safe_log(self.pdf(z))


def reconstruct(hat_h) -> LogConcaveDensity | TrivialSemigroup:
    """Recover the density whose generator is ``hat_h``, normalised by ``F(0) = 1/2``.

    A :class:`GeneratorPair` built from nodes is reconstructed exactly.
    """
    if isinstance(hat_h, GeneratorPair):
        if hat_h.ps is not None:
            if np.max(hat_h.values) <= 0:
                return TRIVIAL
            return PiecewiseLinearReconstruction(hat_h.ps, hat_h.values)
        hat_h = hat_h.hat_h
    _, vals = _check_concave(hat_h, exc=NonConcaveInput)
    if np.max(vals) <= 0:
        return TRIVIAL
    return ReconstructedDensity(hat_h)


# implied volatility surfaces ---------------------------------------------------

YFUNS: dict[str, Callable[[float, float], float]] = {
    "log1p": lambda t, s: s * math.log1p(t),
    "sqrt": lambda t, s: s * math.sqrt(t),
    "linear": lambda t, s: s * t,
}


@dataclass(frozen=True)
class SurfaceRow:
    kappa: float
    t: float
    price: float
    implied_vol: float


def implied_vol_surface(f: LogConcaveDensity, Y: Callable[[float], float],
                        kappas: Iterable[float], ts: Iterable[float]) -> list[SurfaceRow]:
    """Rows ``(kappa, t, C_f(kappa, Y(t)), Y_BS(kappa, price)/sqrt(t))``."""
    rows = []
    kappas = list(kappas)
    prev = -math.inf
    for t in ts:
        yt = Y(t)
        if yt < 0 or yt < prev - 1e-15:
            raise ValueError("Y must be nonnegative and nondecreasing")
        prev = yt
        for k in kappas:
            price = surface_price(f, k, yt)
            if yt == 0:
                vol = 0.0
            else:
                vol = ybs(k, price) / math.sqrt(t) if t > 0 else math.inf
            rows.append(SurfaceRow(float(k), float(t), price, vol))
    return rows
