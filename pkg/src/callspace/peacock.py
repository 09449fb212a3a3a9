"""Convex order, peacock checks and a Monte Carlo test of the Gumbel martingale."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import ks_2samp

from . import curvespace as cs
from . import logconcave as lc
from .algebra import leq
from .errors import NotInC1

CHUNK = 1 << 16
KS_COEF_1PCT = 1.63


def convex_order_leq(c1: cs.CallCurve, c2: cs.CallCurve) -> bool:
    """``S1 <= S2`` in convex order, via pointwise dominance of prices."""
    for c in (c1, c2):
        if not cs.is_c1(c):
            raise NotInC1(f"{c!r} has c_inf = {c.c_inf!r}")
    return leq(c1, c2)


@dataclass(frozen=True)
class PeacockFamily:
    density: lc.LogConcaveDensity
    Y: Callable[[float], float]
    t_grid: tuple[float, ...]

    def __post_init__(self):
        ts = tuple(float(t) for t in self.t_grid)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t_grid must be strictly increasing")
        if self.density.support[0] != -math.inf:
            # finite left endpoint leaves mass at zero: c_inf > 0
            raise NotInC1("peacock families need a density with unbounded left support")
        object.__setattr__(self, "t_grid", ts)

    def curve(self, t: float) -> cs.AnalyticCurve:
        return cs.AnalyticCurve(self.density, self.Y(t))


@dataclass(frozen=True)
class PeacockResult:
    ok: bool
    t: float | None = None
    kappa: float | None = None

    def __bool__(self):
        return self.ok


def verify_peacock(fam: PeacockFamily, kappas: Sequence[float], tol: float = 1e-12) -> PeacockResult:
    """Convex order between consecutive members; the first failure is reported."""
    kappas = [float(k) for k in kappas]
    prev = None
    for t in fam.t_grid:
        y = fam.Y(t)
        prices = [lc.surface_price(fam.density, k, y) for k in kappas]
        if prev is not None:
            for k, a, b in zip(kappas, prev, prices):
                if a > b + tol:
                    return PeacockResult(False, t, k)
        prev = prices
    return PeacockResult(True)


def gumbel_primal_sample(y, u):
    """``e^y u^(e^y - 1)``: the primal variable of the Gumbel surface at ``y``."""
    return np.exp(y) * np.power(u, np.expm1(y))


@dataclass(frozen=True)
class IncrementTest:
    t1: float
    t2: float
    g: str
    mean: float
    se: float
    passed: bool


@dataclass(frozen=True)
class McReport:
    n_paths: int
    ts: tuple[float, ...]
    means: tuple[float, ...]
    ses: tuple[float, ...]
    ks_statistics: tuple[float, ...]
    ks_critical: float
    increments: tuple[IncrementTest, ...] = field(default=())
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "ts": list(self.ts),
            "means": list(self.means),
            "ses": list(self.ses),
            "ks_statistics": list(self.ks_statistics),
            "ks_critical": self.ks_critical,
            "increments": [vars(i) for i in self.increments],
            "pass": self.passed,
        }


def _chunk_paths(seed: int, chunk: int, size: int, ts: np.ndarray):
    """Simulated ``S_t`` and reference primal draws for one block of paths."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))
    z = np.zeros((size, 2))
    s_paths = np.empty((ts.size, size))
    prev = 0.0
    for i, t in enumerate(ts):
        dt = t - prev
        if dt > 0:
            z = math.exp(dt / 2) * z + math.sqrt(math.expm1(dt) / 2) * rng.standard_normal((size, 2))
        s_paths[i] = np.exp(t - np.einsum("ij,ij->i", z, z))
        prev = t
    ref = np.empty((ts.size, size))
    for i, t in enumerate(ts):
        ref[i] = gumbel_primal_sample(t, 1.0 - rng.random(size))
    return s_paths, ref


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def gumbel_martingale_sim(t_grid: Sequence[float], n_paths: int, seed: int,
                          threads: int | None = None) -> McReport:
    """Exact-transition simulation of ``S_t = exp(t - |Z_t|^2)``.

    Paths are generated in fixed blocks of ``CHUNK``; block ``j`` draws from the
    Philox stream keyed by ``(seed, j)``, so the output does not depend on
    ``threads``.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(ts < 0) or np.any(np.diff(ts) <= 0):
        raise ValueError("t_grid must be nonnegative and strictly increasing")
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    sizes = [min(CHUNK, n_paths - j * CHUNK) for j in range(-(-n_paths // CHUNK))]
    threads = threads or os.cpu_count() or 1
    jobs = [(seed, j, size, ts) for j, size in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda a: _chunk_paths(*a), jobs))
    else:
        parts = [_chunk_paths(*a) for a in jobs]
    sim = np.concatenate([p[0] for p in parts], axis=1)
    ref = np.concatenate([p[1] for p in parts], axis=1)

    means, ses, ks = [], [], []
    ok = True
    for i in range(ts.size):
        m, se = _mean_se(sim[i])
        means.append(m)
        ses.append(se)
        ok &= abs(m - 1.0) <= 3 * se
        stat = float(ks_2samp(sim[i], ref[i]).statistic)
        ks.append(stat)
    crit = KS_COEF_1PCT * math.sqrt(2.0 / n_paths)
    ok &= all(k < crit for k in ks)

    incs = []
    for i in range(1, ts.size):
        s1, s2 = sim[i - 1], sim[i]
        diff = s2 - s1
        med = np.median(s1)
        for name, g in (("one", np.ones_like(s1)), ("identity", s1),
                        ("above_median", (s1 > med).astype(float))):
            m, se = _mean_se(diff * g)
            passed = abs(m) <= 3 * se if se > 0 else m == 0.0
            ok &= passed
            incs.append(IncrementTest(float(ts[i - 1]), float(ts[i]), name, m, se, bool(passed)))
    return McReport(n_paths, tuple(ts.tolist()), tuple(means), tuple(ses), tuple(ks), crit,
                    tuple(incs), bool(ok))
