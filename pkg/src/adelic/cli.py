"""Command-line entry point: `adelic <subcommand> ...`.

Every subcommand prints one report (JSON, or CSV for `uscan`).  Real
quantities are emitted as {"value", "error", "error_kind"} records with
error_kind "certified" or "heuristic"; integers stay integers.  Exit codes:
0 success, 2 bad input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from . import __version__
from .energy import (
    AdelicEpsilon,
    GaloisSetQ,
    MapFamily,
    NumericMap,
    _is_degenerate,
    mutual_energy_arch,
    pairing_lower_arch,
    potential_energy,
    regularized_set_energy,
    split_bound,
)
from .green import green_value, holder_certificate, holder_verify, tail_terms
from .heights import canonical_height, hrat
from .preper import (
    UniformBoundInputs,
    common_preperiodic_numeric,
    common_rational_preperiodic,
    height_box,
    rational_preperiodic_points,
    uniform_bound_calculator,
)
from .projmap import DegenerateMapError, ProjPointC, ProjPointQ, RationalMapP1
from .qfield import DEFAULT_PRECISION, Place, as_rational, format_rational, product_formula_residual

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def _load_json_arg(text: str, what: str):
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{what}: cannot read {text[1:]}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_map(text: str, what: str = "map") -> RationalMapP1:
    obj = _load_json_arg(text, what)
    if not isinstance(obj, dict):
        raise InputError(f"{what}: expected a JSON object")
    for key in ("d", "F0", "F1"):
        if key not in obj:
            raise InputError(f"{what}: missing field {key!r}")
    for key in ("F0", "F1"):
        if not isinstance(obj[key], list):
            raise InputError(f"{what}.{key}: expected a list of coefficient strings")
        for i, c in enumerate(obj[key]):
            try:
                as_rational(c)
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise InputError(f"{what}.{key}[{i}]: cannot parse rational {c!r}") from exc
    try:
        d = int(obj["d"])
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}.d: expected an integer") from exc
    if len(obj["F0"]) != d + 1 or len(obj["F1"]) != d + 1:
        raise InputError(f"{what}: F0 and F1 need d+1 = {d + 1} coefficients")
    try:
        return RationalMapP1.from_json(obj)
    except DegenerateMapError as exc:
        raise InputError(f"{what}: degenerate map (Res = 0)") from exc


def parse_point(text: str) -> ProjPointQ:
    try:
        return ProjPointQ.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"point: cannot parse {text!r}") from exc


def parse_place(text: str) -> Place:
    try:
        return Place.parse(text)
    except ValueError as exc:
        raise InputError(f"place: {exc}") from exc


def parse_set(text: str) -> GaloisSetQ:
    obj = _load_json_arg(text, "set")
    if not isinstance(obj, list):
        raise InputError("set: expected a JSON array of point strings")
    try:
        return GaloisSetQ.of([str(s) for s in obj])
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"set: {exc}") from exc


def parse_eps(text: str) -> AdelicEpsilon:
    obj = _load_json_arg(text, "eps")
    if not isinstance(obj, dict):
        raise InputError("eps: expected a JSON object such as {\"arch\": \"1/2\"}")
    try:
        return AdelicEpsilon.parse(obj)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"eps: {exc}") from exc


def _axis(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise InputError(f"grid axis {spec!r}: expected start:stop:count")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise InputError("grid axis count must be >= 1")
    return [a] if n == 1 else [a + (b - a) * k / (n - 1) for k in range(n)]


def parse_grid(text: str) -> list[complex]:
    """"re_spec,im_spec" with each spec a value or start:stop:count."""
    try:
        re_s, im_s = text.split(",")
        return [complex(x, y) for y in _axis(im_s) for x in _axis(re_s)]
    except ValueError as exc:
        raise InputError(f"grid: cannot parse {text!r}") from exc


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

class Emitter:
    def __init__(self, precision: int):
        self.precision = precision
        self.digits = max(17, int(precision * math.log10(2)))

    def real(self, x) -> str:
        if isinstance(x, Fraction):
            return format_rational(x)
        if isinstance(x, (float, np.floating)):
            return repr(float(x))
        with mp.workprec(self.precision):
            return mpmath.nstr(mpmath.mpf(x), self.digits, min_fixed=-6, max_fixed=12)

    def num(self, x, err=0, kind: str = "certified") -> dict:
        return {"value": self.real(x), "error": self.real(err), "error_kind": kind}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def emit_report(report, fmt: str, path: str | None) -> None:
    if fmt == "csv":
        text = report
    else:
        text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cert_record(cert, em: Emitter) -> dict:
    p = cert.params
    return {
        "place": str(cert.place),
        "C": em.num(cert.C),
        "alpha": em.num(cert.alpha),
        "K": em.num(cert.K),
        "alpha0": em.num(cert.alpha0),
        "formula_alpha": em.num(cert.formula_alpha),
        "C1": em.num(p.C1),
        "C2": em.num(p.C2),
        "C3": em.num(p.C3),
        "R": em.num(p.R),
    }


def cmd_resultant(a, em):
    f = parse_map(a.map)
    return {"map": f.to_json(), "degree": f.degree, "resultant": str(f.resultant),
            "bad_primes": list(f.bad_primes)}


def cmd_green(a, em):
    f = parse_map(a.map)
    v = parse_place(a.place)
    x = _point_any(a.point, a.prec, v)
    g = green_value(f, x, v, a.tol, a.prec)
    cert = holder_certificate(f, v, a.prec)
    rec = _cert_record(cert, em)
    rec.update({"point": a.point, "green": em.num(g.value, g.error, "certified" if g.certified else "heuristic"),
                "tail_N": g.terms})
    return rec


def _point_any(text: str, prec: int, v: Place):
    """Rational points stay exact; "re+imj" complex inputs are allowed at the archimedean place."""
    try:
        return parse_point(text)
    except InputError:
        if v.p is not None:
            raise
        try:
            z = complex(text.replace(" ", ""))
        except ValueError as exc:
            raise InputError(f"point: cannot parse {text!r}") from exc
        with mp.workprec(prec):
            return ProjPointC(mpmath.mpc(z), 1)


def cmd_holder_cert(a, em):
    f = parse_map(a.map)
    v = parse_place(a.place)
    cert = holder_certificate(f, v, a.prec)
    rec = _cert_record(cert, em)
    rec["tail_N"] = int(tail_terms(cert.params.C1, f.degree, a.tol)) if cert.params.C1 > 0 else 0
    return rec


def cmd_holder_verify(a, em):
    f = parse_map(a.map)
    v = parse_place(a.place)
    cert = holder_certificate(f, v, a.prec)
    if a.corrupt != 1:
        cert = cert.scaled(mpmath.mpf(1) / a.corrupt)
    rep = holder_verify(f, v, cert, a.samples, a.seed)
    witness = None
    if rep.witness:
        witness = {k: (em.real(w) if isinstance(w, (float, mpmath.mpf)) else str(w)) for k, w in sorted(rep.witness.items())}
    return {"place": str(v), "passed": rep.passed, "num_pairs": rep.num_pairs, "violations": rep.violations,
            "max_ratio": em.num(rep.max_ratio, 0, "heuristic"), "C": em.num(cert.C), "alpha": em.num(cert.alpha),
            "witness": witness}


def cmd_height(a, em):
    f = parse_map(a.map)
    x = parse_point(a.point)
    h = canonical_height(f, x, a.tol, a.prec)
    return {"point": str(x), "value": em.num(h.value, h.certified_error),
            "breakdown": {k: em.num(v, 0 if k == "naive" else h.certified_error) for k, v in h.breakdown.items()}}


def cmd_hrat(a, em):
    f = parse_map(a.map)
    return {"hrat": em.num(hrat(f, a.prec))}


def _orbit_record(o):
    return {"point": str(o.point), "m": o.witness[0], "n": o.witness[1], "orbit": [str(p) for p in o.orbit]}


def cmd_preper(a, em):
    f = parse_map(a.map)
    pts = rational_preperiodic_points(f, math.log(a.box), a.prec)
    return {"height_box": a.box, "bound": em.num(mpmath.log(a.box)), "count": len(pts),
            "points": [_orbit_record(o) for o in pts]}


def cmd_common_preper(a, em):
    f, g = parse_map(a.f, "f"), parse_map(a.g, "g")
    common = common_rational_preperiodic(f, g, math.log(a.box), a.prec)
    out = {"height_box": a.box, "count": len(common),
           "points": [{"point": str(x), "f": _orbit_record(of), "g": _orbit_record(og)} for x, (of, og) in common.items()]}
    if a.numeric:
        rep = common_preperiodic_numeric(f, g, a.max_m, a.max_n, precision=a.prec)
        out["numeric"] = {
            "label": rep.label, "exceptional": rep.exceptional, "notes": rep.notes,
            "spectrum_sizes": list(rep.spectrum_sizes),
            "matches": [{"point": m["point"] if isinstance(m["point"], str) else
                         {"re": em.num(m["point"].real, 0, "heuristic"), "im": em.num(m["point"].imag, 0, "heuristic")},
                         "residual_f": em.num(m["residual_f"], 0, "heuristic"),
                         "residual_g": em.num(m["residual_g"], 0, "heuristic")} for m in rep.matches],
        }
    return out


def cmd_pairing_energy(a, em):
    f, g = parse_map(a.f, "f"), parse_map(a.g, "g")
    e = mutual_energy_arch(f, g, a.depth)
    low = pairing_lower_arch(f, g, a.depth)
    u = potential_energy(f, g, a.depth)
    return {"depth": a.depth, "eps": em.real(e.eps), "exceptional": e.details.get("exceptional"),
            "mutual_energy_arch": em.num(e.value, e.error, "heuristic"),
            "pairing_lower_arch": em.num(low.value, low.error, "heuristic"),
            "potential_estimate": em.num(u.value, u.error, "heuristic")}


def cmd_set_energy(a, em):
    E = parse_set(a.set)
    eps = parse_eps(a.eps)
    r = regularized_set_energy(E, eps, a.prec)
    quad = mpmath.mpf(2) ** (-a.prec // 2)
    return {"set": [str(p) for p in E.points], "lhs": em.num(r.lhs, quad), "rhs": em.num(r.rhs, quad),
            "gap": em.num(r.gap, 2 * quad), "holds": bool(r.lhs >= r.rhs - 2 * quad),
            "per_place": {k: em.num(v, quad) for k, v in r.per_place.items()}}


def default_point_set(f: RationalMapP1, g: RationalMapP1, box: int = 10, precision: int = DEFAULT_PRECISION) -> GaloisSetQ:
    """Affine common rational preperiodic points of small height, or {0} if there are none."""
    pts = [x for x in common_rational_preperiodic(f, g, math.log(box), precision) if x.b != 0]
    return GaloisSetQ.of(pts) if pts else GaloisSetQ.of(["0"])


def cmd_bound_split(a, em):
    f, g = parse_map(a.f, "f"), parse_map(a.g, "g")
    E = parse_set(a.set) if a.set else default_point_set(f, g, precision=a.prec)
    try:
        delta = as_rational(a.delta)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"delta: cannot parse {a.delta!r}") from exc
    rep = split_bound(f, g, E, delta, a.tol, a.prec)
    out = {
        "delta": format_rational(rep.delta), "set": [str(p) for p in E.points],
        "per_place_terms": [{"place": str(t.place), "logC": em.num(t.logC), "alpha": em.num(t.alpha),
                             "eps": em.num(t.eps), "contribution": em.num(t.contribution)} for t in rep.per_place_terms],
        "holder_term": em.num(rep.holder_term),
        "height_term": em.num(rep.height_term, rep.height_error),
        "total_upper_bound": em.num(rep.total_upper_bound, rep.height_error),
        "generic": {"A": em.num(rep.generic["A"]), "B": em.num(rep.generic["B"]),
                    "value": em.num(rep.generic["value"], rep.height_error),
                    "note": rep.generic["note"]},
    }
    if a.with_lower:
        low = pairing_lower_arch(f, g, a.depth)
        out["pairing_lower_arch"] = em.num(low.value, low.error, "heuristic")
    return out


def cmd_uscan(a, em):
    fam = MapFamily.shifted_square() if not a.family else _family(a.family)
    grid = parse_grid(a.grid)
    fns = fam._compiled()

    def one(t):
        maps = []
        for e0, e1 in fns:
            maps.append(NumericMap(tuple(complex(e(mpmath.mpc(t))) for e in e0),
                                   tuple(complex(e(mpmath.mpc(t))) for e in e1)))
        if any(_is_degenerate(m) for m in maps):
            return t, None
        try:
            return t, potential_energy(maps[0], maps[1], a.depth)
        except ArithmeticError:
            return t, None

    if a.threads > 1:
        with ThreadPoolExecutor(a.threads) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(t) for t in grid]
    if all(r is None for _, r in results):
        raise InputError("uscan: every grid point is degenerate")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "u", "err"])
    for t, r in results:
        if r is None:
            w.writerow([repr(t.real), repr(t.imag), "nan", "nan"])
        else:
            w.writerow([repr(t.real), repr(t.imag), repr(float(r.value)), repr(float(r.error))])
    return buf.getvalue()


def _family(text: str) -> MapFamily:
    obj = _load_json_arg(text, "family")
    try:
        fam = MapFamily.from_json(obj)
        fam._compiled()
        return fam
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"family: {exc}") from exc


def cmd_uniform_n(a, em):
    try:
        inp = UniformBoundInputs(a.C, a.C_prime, a.C1, a.C2, a.eps, a.deg)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    r = uniform_bound_calculator(inp, a.prec)
    return {"N": r.N, "B": em.num(r.B), "small_height_branch": em.num(r.small_height_branch),
            "large_height_branch": em.num(r.large_height_branch), "dominant": r.dominant,
            "height_threshold": em.num(r.height_threshold), "delta_large": em.num(r.delta_large),
            "delta_small": em.num(r.delta_small), "C_used": em.num(r.C_used)}


def cmd_product_check(a, em):
    rows = []
    for s in a.x:
        try:
            x = as_rational(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"x: cannot parse {s!r}") from exc
        if x == 0:
            raise InputError("x: the product formula needs x != 0")
        r = product_formula_residual(x, a.prec)
        rows.append({"x": format_rational(x), "residual": em.num(r, mpmath.mpf(2) ** (-a.prec + 8))})
    return {"values": rows}


COMMANDS = {
    "resultant": cmd_resultant, "green": cmd_green, "holder-cert": cmd_holder_cert,
    "holder-verify": cmd_holder_verify, "height": cmd_height, "hrat": cmd_hrat, "preper": cmd_preper,
    "common-preper": cmd_common_preper, "pairing-energy": cmd_pairing_energy, "set-energy": cmd_set_energy,
    "bound-split": cmd_bound_split, "uscan": cmd_uscan, "uniform-n": cmd_uniform_n,
    "product-check": cmd_product_check,
}


# --------------------------------------------------------------------------
# argument parser
# --------------------------------------------------------------------------

def _env(name: str, default):
    return os.environ.get("ADELIC_" + name, default)


def _positive_float(s: str) -> float:
    v = float(Fraction(s)) if "/" in s else float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _precision(s: str) -> int:
    v = int(s)
    if v < 53:
        raise argparse.ArgumentTypeError("precision must be >= 53 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=_precision, default=_precision(str(_env("PREC", DEFAULT_PRECISION))),
                        help="working precision in bits (>= 53)")
    common.add_argument("--tol", type=_positive_float, default=_positive_float(str(_env("TOL", "1e-30"))),
                        help="target error in log-height units")
    common.add_argument("--depth", type=int, default=int(_env("DEPTH", 9)), help="pullback depth for energy estimates")
    common.add_argument("--seed", type=int, default=int(_env("SEED", 0)), help="RNG seed")
    common.add_argument("--threads", type=int, default=int(_env("THREADS", 1)), help="worker threads")
    common.add_argument("--format", choices=["json", "csv"], default=_env("FORMAT", None))
    common.add_argument("--out", default=_env("OUT", None), help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="adelic", description="Green functions, heights and energies for maps of P^1 over Q.")
    p.add_argument("--version", action="version", version=f"adelic {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    s = add("resultant", "resultant and bad primes of a map")
    s.add_argument("map", help="map JSON or @file")
    s = add("green", "Green function value and Hoelder constants at a place")
    s.add_argument("map")
    s.add_argument("--point", required=True)
    s.add_argument("--place", default="arch")
    s = add("holder-cert", "Hoelder certificate (C, alpha) at a place")
    s.add_argument("map")
    s.add_argument("--place", default="arch")
    s = add("holder-verify", "sample pairs against a Hoelder certificate")
    s.add_argument("map")
    s.add_argument("--place", default="arch")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--corrupt", type=float, default=1.0, help="divide C by this factor before checking")
    s = add("height", "canonical height of a rational point")
    s.add_argument("map")
    s.add_argument("--point", required=True)
    s = add("hrat", "height of the coefficient vector")
    s.add_argument("map")
    s = add("preper", "rational preperiodic points of bounded height")
    s.add_argument("map")
    s.add_argument("--box", type=int, default=10, help="height box H: points with max(|a|,|b|) <= H")
    s = add("common-preper", "common rational preperiodic points of two maps")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--box", type=int, default=10)
    s.add_argument("--numeric", action="store_true", help="also match complex spectra (heuristic)")
    s.add_argument("--max-m", type=int, default=1)
    s.add_argument("--max-n", type=int, default=2)
    s = add("pairing-energy", "archimedean mutual energy of the equilibrium measures")
    s.add_argument("f")
    s.add_argument("g")
    s = add("set-energy", "regularized adelic energy of a finite rational set")
    s.add_argument("--set", required=True, help='JSON array such as ["0", "1/2"]')
    s.add_argument("--eps", default="{}", help='JSON object such as {"arch": "1/2", "2": "1/4"}')
    s = add("bound-split", "upper bound for the pairing from Hoelder certificates")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--set", default=None, help="default: common small preperiodic points, else {0}")
    s.add_argument("--delta", default="1/2")
    s.add_argument("--with-lower", action="store_true", help="also report the archimedean lower estimate")
    s = add("uscan", "potential U over a parameter grid (CSV)")
    s.add_argument("--family", default=None, help="family JSON {f: map, g: map} with coefficients in t; default (z^2, z^2+t)")
    s.add_argument("--grid", required=True, help="re_spec,im_spec with start:stop:count or a single value")
    s = add("uniform-n", "explicit cardinality bound N")
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--C-prime", type=float, required=True)
    s.add_argument("--C1", type=float, required=True)
    s.add_argument("--C2", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--deg", type=int, required=True)
    s = add("product-check", "sum over places of log|x|_v")
    s.add_argument("x", nargs="+")
    return p


def _config(a) -> dict:
    return {"command": a.command, "precision": a.prec, "tol": repr(a.tol), "seed": a.seed, "depth": a.depth,
            "threads": a.threads, "version": __version__}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_INPUT
    fmt = a.format or ("csv" if a.command == "uscan" else "json")
    if (fmt == "csv") != (a.command == "uscan"):
        print(f"adelic: format {fmt} is not available for {a.command}", file=sys.stderr)
        return EXIT_INPUT
    if a.depth < 1 or a.threads < 1:
        print("adelic: --depth and --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    em = Emitter(a.prec)
    try:
        result = COMMANDS[a.command](a, em)
    except (InputError, ValueError, ZeroDivisionError, DegenerateMapError) as exc:
        print(f"adelic: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, mpmath.libmp.libhyper.NoConvergence, np.linalg.LinAlgError) as exc:
        print(f"adelic: no convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if fmt == "json":
        result = {"command": a.command, "config": _config(a), "result": result}
    try:
        emit_report(result, fmt, a.out)
    except OSError as exc:
        print(f"adelic: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
