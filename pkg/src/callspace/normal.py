"""Standard normal density, distribution function and quantile."""
from __future__ import annotations

import math

import numpy as np
from scipy import special

SQRT_2PI = math.sqrt(2.0 * math.pi)


def norm_pdf(x):
    if np.ndim(x) == 0:
        return math.exp(-0.5 * float(x) * float(x)) / SQRT_2PI
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def norm_cdf(x):
    if np.ndim(x) == 0:
        x = float(x)
        if math.isinf(x):
            return 1.0 if x > 0 else 0.0
        return 0.5 * math.erfc(-x / math.sqrt(2.0))
    return special.ndtr(np.asarray(x, dtype=float))


def norm_sf(x):
    return norm_cdf(-np.asarray(x) if np.ndim(x) else -float(x))


def norm_ppf(p):
    """Quantile; ``-inf`` at 0 and ``+inf`` at 1."""
    if np.ndim(p) == 0:
        return float(special.ndtri(float(p)))
    return special.ndtri(np.asarray(p, dtype=float))


def norm_logpdf(x):
    return -0.5 * x * x - math.log(SQRT_2PI)
