"""Command-line front end.  Every command prints one JSON report on stdout.

Exit status is 0 on success, 1 when a check or verdict fails and 2 on bad
input.  Errors are reported as JSON on stderr.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import FreeballError, InputError
from .jsonio import (decode_pencil, decode_poly, decode_tuple, encode_cmatrix, load_json, to_jsonable)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
REPRODUCE_IDS = ("eg2.6", "ex3.3", "ex3.7-1", "ex3.7-2", "sec6.1", "psum", "ex5.6")


class Verdict(Exception):
    """Carries a finished report whose verdict is a failure."""

    def __init__(self, report):
        super().__init__("verdict failed")
        self.report = report


def _default_seed():
    raw = os.environ.get("FREEBALL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"FREEBALL_SEED must be an integer, got {raw!r}")


def _levels(text):
    try:
        out = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}")
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("levels must be positive integers")
    return out


def _floats(text):
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def _ball(text, d):
    from .ncball import BallSpec
    text = text.strip()
    if text.startswith("{") or os.path.exists(text):
        return BallSpec.from_json(load_json(text))
    return BallSpec.parse(text, d)


def _poly(text):
    """A polynomial from a JSON file, inline JSON or an expression string."""
    from .ratexpr import expr_is_polynomial, parse_any
    text = text.strip()
    if text.startswith("{") or os.path.exists(text):
        return decode_poly(load_json(text))
    return expr_is_polynomial(parse_any(text))


def _config(args):
    cfg = {"seed": args.seed, "jobs": args.jobs}
    for key in ("levels", "samples", "r_grid", "tol", "trials"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    return cfg


# subcommands -----------------------------------------------------------------

def cmd_eval(args):
    from .ratexpr import eval_expr, num_vars, parse_any
    e = parse_any(args.expr, args.d)
    d = args.d or max(num_vars(e), 1)
    x = decode_tuple(load_json(args.point)) if args.point else np.zeros((d, 1, 1), dtype=np.complex128)
    if x.shape[0] != d:
        from .errors import DimensionMismatch
        raise DimensionMismatch(f"point has {x.shape[0]} matrices, expression needs {d}")
    return {"value": encode_cmatrix(eval_expr(e, x))}


def cmd_linearize(args):
    from .linearize import linearize, normalize_at_zero, verify
    p = _poly(args.poly)
    if args.normalize:
        p = normalize_at_zero(p)
    lin = linearize(p)
    out = {"linearization": lin.to_json()}
    if args.verify:
        rep = verify(lin, _ball(args.ball, p.d) if args.ball else None, trials=args.trials, seed=args.seed)
        out["verify"] = rep.to_json()
        if not rep.ok:
            raise Verdict(out)
    return out


def cmd_atom(args):
    from .linearize import atom_certificate
    return atom_certificate(_poly(args.poly)).to_json()


def cmd_irreducible(args):
    from .pencil import irreducible
    res = irreducible(decode_pencil(load_json(args.tuple)), seed=args.seed)
    return res.to_json()


def cmd_specrad(args):
    from .pencil import jsr_rowball
    t = decode_tuple(load_json(args.tuple))
    if args.ball != "rowball":
        raise InputError("specrad supports only --ball rowball")
    return jsr_rowball(t).to_json()


def cmd_stable(args):
    from .ncball import BallSpec
    from .ngn import stability_scan
    from .ratexpr import eval_expr, num_vars, parse_any
    e = parse_any(args.expr, args.d)
    d = args.d or max(num_vars(e), 1)
    spec = _ball(args.ball, d) if args.ball else BallSpec.polydisk(d)
    rep = stability_scan(lambda x: eval_expr(e, x), spec, levels=args.levels,
                         samples=args.samples or 2500, seed=args.seed)
    out = rep.to_json()
    if rep.verdict != "no_witness":
        raise Verdict(out)
    return out


def cmd_ngn(args):
    from .ngn import bound_report
    p = _poly(args.poly)
    spec = _ball(args.ball, p.d) if args.ball else None
    known = load_json(args.known) if args.known else None
    rep = bound_report(p, spec, poly_id=args.id, known=known, r_grid=args.r_grid or (0.0, 0.5, 0.9, 0.99, 0.999),
                       levels=args.levels, samples=args.samples or 150, seed=args.seed)
    out = rep.to_json()
    if rep.verdict == "inconsistent":
        raise Verdict(out)
    return out


def cmd_realize(args):
    from .ratexpr import parse_any
    from .realization import synth, synth_check
    e = parse_any(args.expr, args.d)
    r = synth(e, args.d)
    out = {"realization": r.to_json()}
    if args.check:
        rep = synth_check(e, r, points=args.trials, seed=args.seed, d=args.d)
        out["check"] = rep.to_json()
        if not rep.ok:
            raise Verdict(out)
    return out


def cmd_fm_check(args):
    from .realization import FMRealization, fm_check
    p = _poly(args.poly)
    fm = FMRealization.from_json(load_json(args.fm))
    rep = fm_check(p, fm, _ball(args.ball, p.d) if args.ball else None, trials=args.trials, seed=args.seed)
    out = rep.to_json()
    if not rep.ok:
        raise Verdict(out)
    return out


def cmd_psum(args):
    from .ngn import accretive_approximant, decoupled_psum_demo, psum_check, psum_eval
    out = {}
    ok = True
    if args.check or not args.decoupled:
        rep = psum_check(levels=args.levels, samples=args.samples or 250, seed=args.seed)
        app = accretive_approximant(lambda x: psum_eval(*x), levels=args.levels,
                                    samples=args.samples or 250, seed=args.seed)
        out["check"] = rep.to_json()
        out["approximant"] = app.to_json()
        ok = ok and rep.ok and app.ok
    if args.decoupled:
        out["decoupled"] = decoupled_psum_demo(seed=args.seed)
    if not ok:
        raise Verdict(out)
    return out


def cmd_reproduce(args):
    from .reproduce import compare, load_expected, run
    result = run(args.example_id, seed=args.seed)
    diff = compare(result, load_expected(args.example_id))
    out = {"id": args.example_id, "result": result, "diff": diff, "ok": all(d["ok"] for d in diff)}
    if not out["ok"]:
        raise Verdict(out)
    return out


# parser ----------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $FREEBALL_SEED or 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker cap (recorded in the report)")
    common.add_argument("--levels", type=_levels, default=(1, 2, 3, 4))
    common.add_argument("--samples", type=int, default=None, help="samples per level")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")

    ap = argparse.ArgumentParser(prog="freeball", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("eval", cmd_eval, "evaluate an expression at a matrix tuple")
    p.add_argument("--expr", required=True)
    p.add_argument("--point", default=None)
    p.add_argument("-d", type=int, default=None)

    p = add("linearize", cmd_linearize, "linearize a matrix polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--normalize", action="store_true", help="replace P by P P(0)^{-1} first")
    p.add_argument("--ball", default=None)

    p = add("atom", cmd_atom, "atom certificate via an irreducible linearization")
    p.add_argument("--poly", required=True)

    p = add("irreducible", cmd_irreducible, "irreducibility of a matrix tuple")
    p.add_argument("--tuple", required=True)

    p = add("specrad", cmd_specrad, "joint spectral radius over the row ball")
    p.add_argument("--tuple", required=True)
    p.add_argument("--ball", default="rowball")

    p = add("stable", cmd_stable, "search for singular points in a ball")
    p.add_argument("--expr", required=True)
    p.add_argument("--ball", default=None)
    p.add_argument("-d", type=int, default=None)

    p = add("ngn", cmd_ngn, "bound report for a polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--ball", default=None)
    p.add_argument("--known", default=None, help="JSON map of input values to treat as exact")
    p.add_argument("--id", default="p")
    p.add_argument("--r-grid", dest="r_grid", type=_floats, default=None)

    p = add("realize", cmd_realize, "descriptor realization of an expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--check", action="store_true")
    p.add_argument("-d", type=int, default=None)

    p = add("fm-check", cmd_fm_check, "check an inverse realization of a polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--fm", required=True)
    p.add_argument("--ball", default=None)

    p = add("psum", cmd_psum, "parallel-sum checks")
    p.add_argument("--check", action="store_true")
    p.add_argument("--decoupled", action="store_true")

    p = add("reproduce", cmd_reproduce, "rerun a stored example and diff against expected values")
    p.add_argument("example_id", choices=REPRODUCE_IDS)
    return ap


def _emit(report, path):
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        header = {"artifact": "freeball", "version": __version__, "command": args.command,
                  "config": _config(args)}
        try:
            body = args.func(args)
        except Verdict as v:
            _emit(dict(header, report=v.report, ok=False), args.output)
            return EXIT_FAIL
        _emit(dict(header, report=body, ok=True), args.output)
        return EXIT_OK
    except InputError as e:
        sys.stderr.write(json.dumps(to_jsonable(e.to_json())) + "\n")
        return EXIT_INPUT
    except FreeballError as e:
        sys.stderr.write(json.dumps(to_jsonable(e.to_json())) + "\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
