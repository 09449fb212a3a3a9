"""Global numerical tolerances.

``algebra`` is used for identities that hold exactly on piecewise-linear
grids; ``root`` for root-finding in price space. The environment variable
``CALLSPACE_TOL`` overrides ``algebra`` when read through :func:`from_env`.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    algebra: float = 1e-12
    root: float = 1e-8

    def __post_init__(self):
        if not (self.algebra > 0 and self.root > 0):
            raise ValueError("tolerances must be positive")


_current = Tolerances()


def get_tolerances() -> Tolerances:
    return _current


def set_tolerances(**overrides: float) -> Tolerances:
    global _current
    _current = replace(_current, **overrides)
    return _current


def from_env(environ=None) -> Tolerances:
    environ = os.environ if environ is None else environ
    raw = environ.get("CALLSPACE_TOL")
    if raw:
        return set_tolerances(algebra=float(raw))
    return _current
