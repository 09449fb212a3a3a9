"""Command-line interface.

Exit codes: 0 success, 1 invalid input or failed verification, 2 numerical
failure. Errors are written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import algebra as al
from . import blackscholes as bs
from . import curvespace as cs
from . import logconcave as lc
from . import peacock as pk
from . import serialize as ser
from . import suites
from . import zonoid as zn
from .config import from_env
from .errors import CallspaceError, InputError, NonConcaveInput, NotConcave, NumericalError

DEFAULT_KAPPAS = "log:0.01:100:201"


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> np.ndarray:
    """``a:b:n`` gives n equally spaced points from a to b inclusive; a
    ``log:`` prefix spaces them geometrically."""
    log = text.startswith("log:")
    body = text[4:] if log else text
    parts = body.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad grid {text!r}: expected a:b:n") from exc
    if len(parts) != 3 or n < 2:
        raise UsageError(f"bad grid {text!r}: need a:b:n with n >= 2")
    if log:
        if a <= 0 or b <= 0:
            raise UsageError("log grids need positive endpoints")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _params(raw: str | None) -> dict:
    if not raw:
        return {}
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params must be a JSON object: {exc}") from exc
    if not isinstance(obj, dict):
        raise UsageError("--params must be a JSON object")
    return obj


def _density(args) -> lc.BuiltinDensity:
    return lc.builtin(args.family, _params(args.params))


def _yfun(args):
    try:
        fn = lc.YFUNS[args.yfun]
    except KeyError as exc:
        raise UsageError(f"unknown --yfun {args.yfun!r}; choose from {sorted(lc.YFUNS)}") from exc
    scale = args.scale
    return lambda t: fn(t, scale)


def _emit(obj, out: str | None):
    text = ser.dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(header: Sequence[str], rows, out: str | None):
    fh = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if out:
            fh.close()


def _curve_json(curve: cs.CallCurve, kappas: np.ndarray) -> dict:
    if isinstance(curve, (cs.GridCurve, cs.SpecialCurve)):
        return ser.curve_to_dict(curve)
    # no finite form: sample, then certify the sample
    grid = cs.to_grid(curve, kappas)
    bad = cs.validate(grid)
    if bad:
        raise NumericalError(f"sampled curve fails validation: {bad[0].invariant}")
    return ser.curve_to_dict(grid)


# subcommands -------------------------------------------------------------------

def cmd_price(args):
    if args.family == "normal" and not args.params:
        price = bs.cbs(args.kappa, args.y)
    else:
        price = lc.surface_price(_density(args), args.kappa, args.y)
    return {"kappa": args.kappa, "y": args.y, "family": args.family, "price": price}


def cmd_implied(args):
    res = bs.implied_y(args.kappa, args.price)
    y = res.y if math.isfinite(res.y) else None
    return {"kappa": args.kappa, "price": args.price, "y": y, "saturated": res.saturated}


def cmd_compose(args):
    c1, c2 = ser.load_curve(args.curve1), ser.load_curve(args.curve2)
    return _curve_json(al.bullet(c1, c2), parse_grid(args.kappas))


def cmd_involute(args):
    return _curve_json(al.involute(ser.load_curve(args.curve)), parse_grid(args.kappas))


def cmd_hat(args):
    g = al.hat(ser.load_curve(args.curve))
    if isinstance(g, al.GridHat):
        return ser.hat_to_dict(g)
    ps = parse_grid(args.ps)
    return ser.hat_to_dict(al.GridHat(ps, g(ps)))


def cmd_surface(args):
    rows = lc.implied_vol_surface(_density(args), _yfun(args),
                                  parse_grid(args.kappas), parse_grid(args.ts))
    _write_csv(("kappa", "t", "price", "implied_vol"),
               ((r.kappa, r.t, r.price, r.implied_vol) for r in rows), args.out)
    return None


def cmd_generator(args):
    f = _density(args)
    hat_h = lc.generator_hat(f)
    ps = parse_grid(args.ps)
    pair = lc.generator_H(hat_h)
    return {"family": args.family, "a": pair.a, "b": pair.b,
            "ps": ps.tolist(), "values": [hat_h(float(p)) for p in ps]}


def cmd_reconstruct(args):
    obj = ser.load_json(args.hatH)
    try:
        pair = lc.generator_H(obj["values"], obj["ps"])
    except KeyError as exc:
        raise UsageError(f"generator JSON needs 'ps' and 'values': missing {exc}") from exc
    except NotConcave as exc:
        raise NonConcaveInput(str(exc)) from exc
    f = lc.reconstruct(pair)
    if f is lc.TRIVIAL:
        return {"trivial": True}
    zs = parse_grid(args.zs)
    L, R = f.support
    rows = [(z, f.pdf(z), f.cdf(z)) for z in zs]
    if args.format == "csv":
        _write_csv(("z", "pdf", "cdf"), rows, args.out)
        return None
    return {"trivial": False, "support": [L if math.isfinite(L) else None,
                                          R if math.isfinite(R) else None],
            "z": [r[0] for r in rows], "pdf": [r[1] for r in rows], "cdf": [r[2] for r in rows]}


def cmd_zonoid(args):
    z = zn.lift_zonoid_from_curve(ser.load_curve(args.curve), parse_grid(args.ps))
    _write_csv(("p", "lower", "upper"), z.rows(), args.out)
    return None


def cmd_peacock(args):
    if args.action == "verify":
        return suites.peacock(_density(args), _yfun(args), parse_grid(args.ts),
                              parse_grid(args.kappas))
    if args.seed is None:
        raise UsageError("peacock simulate needs an explicit --seed")
    rep = pk.gumbel_martingale_sim(parse_grid(args.ts), args.paths, args.seed, args.threads)
    return rep.to_dict()


def cmd_verify(args):
    name = args.suite
    if name in ("zonoid", "inequality") and args.seed is None:
        raise UsageError(f"verify {name} needs an explicit --seed")
    if name == "semigroup":
        return suites.semigroup(_density(args), args.y1, args.y2, parse_grid(args.kappas))
    if name == "involution":
        if args.samples and args.seed is None:
            raise UsageError("random involution samples need an explicit --seed")
        return suites.involution(args.seed, args.samples or 0)
    if name == "isomorphism":
        return suites.isomorphism()
    if name == "zonoid":
        return suites.zonoid(args.seed, args.samples or 500)
    if name == "peacock":
        return suites.peacock(_density(args), _yfun(args), parse_grid(args.ts),
                              parse_grid(args.kappas))
    return suites.inequality(args.seed, args.samples or 10_000)


# parser ------------------------------------------------------------------------

def _add_density(p, default="normal"):
    p.add_argument("--family", default=default, choices=lc.FAMILIES)
    p.add_argument("--params", help="JSON object of family parameters")


def _add_yfun(p):
    p.add_argument("--yfun", default="log1p", help="one of: " + ", ".join(sorted(lc.YFUNS)))
    p.add_argument("--scale", type=float, default=1.0, help="multiplier applied to --yfun")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="callspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("price", help="call price C_f(kappa, y)")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    _add_density(p)
    p.set_defaults(fn=cmd_price)

    p = sub.add_parser("implied", help="implied total deviation of a normalised price")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--price", type=float, required=True)
    p.set_defaults(fn=cmd_implied)

    p = sub.add_parser("compose", help="C1 . C2 as curve JSON")
    p.add_argument("--curve1", required=True)
    p.add_argument("--curve2", required=True)
    p.add_argument("--kappas", default=DEFAULT_KAPPAS, help="sampling grid for analytic results")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("involute", help="C* as curve JSON")
    p.add_argument("--curve", required=True)
    p.add_argument("--kappas", default=DEFAULT_KAPPAS, help="sampling grid for analytic results")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_involute)

    p = sub.add_parser("hat", help="concave conjugate as hat JSON")
    p.add_argument("--curve", required=True)
    p.add_argument("--ps", default="0:1:101", help="sampling grid for analytic curves")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_hat)

    p = sub.add_parser("surface", help="price and implied-vol surface CSV")
    _add_density(p, "gumbel")
    _add_yfun(p)
    p.add_argument("--kappas", required=True)
    p.add_argument("--ts", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_surface)

    p = sub.add_parser("generator", help="samples of the generator f o F^-1")
    _add_density(p)
    p.add_argument("--ps", default="0:1:101")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_generator)

    p = sub.add_parser("reconstruct", help="density from a piecewise-linear generator")
    p.add_argument("--hatH", required=True, help="JSON file with 'ps' and 'values'")
    p.add_argument("--zs", default="-4:4:81")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("zonoid", help="lift zonoid boundaries CSV")
    p.add_argument("--curve", required=True)
    p.add_argument("--ps", default="0:1:101")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_zonoid)

    p = sub.add_parser("peacock", help="peacock checks and Gumbel martingale simulation")
    p.add_argument("action", choices=("verify", "simulate"))
    _add_density(p, "gumbel")
    _add_yfun(p)
    p.add_argument("--ts", default="0.25:1:4")
    p.add_argument("--kappas", default="log:0.05:20:60")
    p.add_argument("--paths", type=int, default=1_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=None, help="default: all cores")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_peacock)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=("semigroup", "involution", "isomorphism",
                                     "zonoid", "peacock", "inequality"))
    _add_density(p)
    _add_yfun(p)
    p.add_argument("--y1", type=float, default=1.0)
    p.add_argument("--y2", type=float, default=1.0)
    p.add_argument("--kappas", default="0.1:10:50")
    p.add_argument("--ts", default="0:4:21")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_verify)
    return parser


def _fail(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def run(argv: Sequence[str] | None = None) -> int:
    try:
        from_env()
        args = build_parser().parse_args(argv)
        result = args.fn(args)
        if result is not None:
            _emit(result, getattr(args, "out", None))
            if isinstance(result, dict) and result.get("pass") is False:
                return 1
        return 0
    except InputError as exc:
        return _fail(exc, 1)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(exc, 2)
    except CallspaceError as exc:
        return _fail(exc, 1)
    except ValueError as exc:
        return _fail(exc, 1)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
