"""JSON forms of call curves and conjugates."""
from __future__ import annotations

import json
from typing import Any

from . import algebra
from . import curvespace as cs
from . import logconcave as lc
from .errors import InvalidCurve, NotConcave


def curve_to_dict(curve: cs.CallCurve) -> dict[str, Any]:
    if isinstance(curve, cs.SpecialCurve):
        return {"type": "special", "name": curve.name}
    if isinstance(curve, cs.GridCurve):
        return {"type": "grid", "strikes": curve.strikes.tolist(),
                "prices": curve.prices.tolist(), "c_inf": curve.c_inf}
    if isinstance(curve, cs.AnalyticCurve) and isinstance(curve.density, lc.BuiltinDensity):
        return {"type": "density", "family": curve.density.family,
                "params": curve.density.params(), "y": curve.y}
    raise TypeError(f"no JSON form for {curve!r}; sample it with to_grid first")


def curve_from_dict(obj: dict[str, Any], validate: bool = True) -> cs.CallCurve:
    try:
        kind = obj["type"]
        if kind == "special":
            name = obj["name"]
            if name not in ("E", "Z"):
                raise InvalidCurve(f"unknown special curve {name!r}")
            return cs.E if name == "E" else cs.Z
        if kind == "grid":
            curve = cs.GridCurve(obj["strikes"], obj["prices"], float(obj["c_inf"]))
        elif kind == "density":
            y = float(obj["y"])
            density = lc.builtin(obj["family"], obj.get("params") or {})
            curve = cs.AnalyticCurve(density, y)
        else:
            raise InvalidCurve(f"unknown curve type {kind!r}")
    except (KeyError, TypeError) as exc:
        raise InvalidCurve(f"malformed curve JSON: {exc}") from exc
    if validate and isinstance(curve, cs.GridCurve):
        bad = cs.validate(curve)
        if bad:
            raise InvalidCurve("; ".join(f"{v.invariant} at kappa={v.kappa}" for v in bad))
    return curve


def hat_to_dict(g: algebra.GridHat) -> dict[str, Any]:
    return {"type": "hat-grid", "ps": g.ps.tolist(), "values": g.values.tolist()}


def hat_from_dict(obj: dict[str, Any]) -> algebra.GridHat:
    if obj.get("type", "hat-grid") != "hat-grid":
        raise NotConcave(f"unknown hat type {obj.get('type')!r}")
    try:
        return algebra.GridHat(obj["ps"], obj["values"])
    except KeyError as exc:
        raise NotConcave(f"malformed hat JSON: missing {exc}") from exc


def load_json(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidCurve(f"cannot read {path}: {exc}") from exc


def load_curve(path: str) -> cs.CallCurve:
    return curve_from_dict(load_json(path))


def dumps(obj: Any) -> str:
    # repr-exact floats so reloading is bit-identical
    return json.dumps(obj, allow_nan=False)
