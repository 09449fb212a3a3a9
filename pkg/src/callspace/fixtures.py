"""Fixture curves and seeded random generators for the verification suites."""
from __future__ import annotations

import numpy as np

from . import curvespace as cs
from . import logconcave as lc


def fixture_curves() -> dict[str, cs.CallCurve]:
    """Small named set covering every curve kind and both subspaces."""
    return {
        "E": cs.E,
        "Z": cs.Z,
        "two_atoms": cs.curve_of(cs.DiscreteDistribution([0.5, 1.5], [0.5, 0.5])),
        "with_zero": cs.curve_of(cs.DiscreteDistribution([0.0, 0.8, 2.0], [0.2, 0.5, 0.3])),
        "defective": cs.GridCurve([0.0, 1.0, 2.0], [1.0, 0.2, 0.1], 0.1),
        "spread": cs.curve_of(cs.DiscreteDistribution([0.1, 0.6, 1.0, 2.95], [0.3, 0.3, 0.2, 0.2])),
    }


def fixture_analytic() -> dict[str, cs.CallCurve]:
    return {
        "normal_0.5": cs.AnalyticCurve(lc.builtin("normal"), 0.5),
        "gumbel_0.7": cs.AnalyticCurve(lc.builtin("gumbel"), 0.7),
        "logistic_1": cs.AnalyticCurve(lc.builtin("logistic"), 1.0),
    }


def random_distribution(rng: np.random.Generator, max_atoms: int = 8,
                        mean_one: bool = False) -> cs.DiscreteDistribution:
    """Random law on ``[0, inf)`` with at most ``max_atoms`` atoms and mean <= 1.

    Atoms are drawn log-uniformly, with an occasional atom at zero, then scaled
    so the mean is 1 (``mean_one``) or uniform in ``(0.2, 1]``.
    """
    n = int(rng.integers(1, max_atoms + 1))
    atoms = np.exp(rng.uniform(-3.0, 2.0, n))
    if n > 1 and rng.random() < 0.2:
        atoms[0] = 0.0
    probs = rng.dirichlet(np.ones(n))
    mean = float(atoms @ probs)
    if mean == 0.0:
        atoms = np.ones(n)
        mean = 1.0
    target = 1.0 if mean_one else float(rng.uniform(0.2, 1.0))
    atoms = atoms * (target / mean)
    probs = probs / probs.sum()
    probs[-1] = 1.0 - probs[:-1].sum()
    return cs.DiscreteDistribution(atoms, probs)


def random_curve(rng: np.random.Generator, max_atoms: int = 8,
                 mean_one: bool = False) -> cs.GridCurve:
    """A valid grid curve: the curve of a random discrete law."""
    return cs.curve_of(random_distribution(rng, max_atoms, mean_one))
