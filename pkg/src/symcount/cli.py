"""``symcount``: command-line front end.

Every subcommand writes a table (CSV with a fixed header, one JSON document,
or JSON lines) to ``--output`` or stdout.  All randomness comes from ``--seed``
and the output never contains timestamps, so reruns are byte-identical.

Exit status: 0 on success, 2 on usage errors (including invalid mathematical
inputs such as ``m = 0``), 1 on any other failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import experiments as ex
from .enumeration import PlaceSet, integral_points, primitive_filter
from .varieties import VarietySpec, ternary_isotropic
from .volumes_arch import fit_power_log, shell_volume
from .volumes_padic import (doubling_check, local_density,
                            multi_prime_ball_volume, padic_ball_volume, padic_sphere_volume,
                            structure_fit)

SCHEMA = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers

def _int_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _level(text: str) -> int:
    m = int(text)
    if m == 0:
        raise argparse.ArgumentTypeError("level m = 0 is not allowed")
    return m


def _primes(text: str) -> PlaceSet:
    text = text.strip().lower()
    parts = [v for v in text.replace("inf", "").split(",") if v.strip()]
    try:
        return PlaceSet(tuple(int(v) for v in parts))
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err))


def spec_from_args(args) -> VarietySpec:
    chosen = [a for a in ("form", "detsym", "pfaffian", "spec") if getattr(args, a, None)]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --form, --detsym, --pfaffian, --spec")
    if args.spec:
        with open(args.spec) as fh:
            return VarietySpec.from_json(json.load(fh))
    if args.detsym:
        return VarietySpec.det_sym(args.detsym, sign=args.sign)
    if args.pfaffian:
        return VarietySpec.pfaffian(args.pfaffian, sign=args.sign)
    text = args.form.strip()
    if text.startswith("["):
        Q = json.loads(text)
    else:
        coeffs = [int(v) for v in text.split(",")]
        Q = [[c if i == j else 0 for j in range(len(coeffs))] for i, c in enumerate(coeffs)]
    anisotropic = args.anisotropic
    if len(Q) == 3 and not anisotropic:
        if ternary_isotropic(Q):
            raise UsageError("ternary form has a nontrivial rational zero")
        anisotropic = True
    return VarietySpec.quadric(Q, anisotropic_over_Q=anisotropic)


def _add_variety(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("variety")
    g.add_argument("--form", help='diagonal "1,1,1,-1" or a JSON matrix "[[1,0],[0,1]]"')
    g.add_argument("--detsym", type=int, metavar="N", help="det of symmetric N x N matrices")
    g.add_argument("--pfaffian", type=int, metavar="N", help="Pfaffian of 2N x 2N skew matrices")
    g.add_argument("--spec", metavar="FILE", help="variety JSON file")
    g.add_argument("--sign", type=int, default=1, choices=(1, -1))
    g.add_argument("--anisotropic", action="store_true",
                   help="assert that a ternary form has no rational zero "
                        "(otherwise decided exactly)")


def _add_output(p: argparse.ArgumentParser, mc: bool = False) -> None:
    p.add_argument("--format", choices=("csv", "json", "jsonl"), default="csv")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--plot-csv", metavar="FILE",
                   help="also write long-format (variable, T_or_m, value) CSV")
    if mc:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=10**6)
        p.add_argument("--epsilon", type=float, default=None)


# ---------------------------------------------------------------------------
# output

def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _cell(value) -> str:
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(name: str, params: dict, header: list[str], rows: list[dict], fmt: str,
           summary: dict | None = None) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(row[h]) for h in header])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps(_jsonable({h: row[h] for h in header})) + "\n" for row in rows)
    doc = {"schema": SCHEMA, "experiment": name, "params": params,
           "rows": [{h: row[h] for h in header} for row in rows], "verdicts": summary or {}}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_long(args, triples) -> None:
    if not args.plot_csv:
        return
    with open(args.plot_csv, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable", "T_or_m", "value"])
        for var, t, v in triples:
            w.writerow([var, _cell(t), _cell(v)])


def _emit(args, name, params, header, rows, summary=None, long=()):
    _write(args, render(name, params, header, rows, args.format, summary))
    _write_long(args, long)


# ---------------------------------------------------------------------------
# subcommands

def cmd_enumerate(args) -> None:
    spec = spec_from_args(args)
    X = integral_points(spec, args.level, args.bound, oracle=args.oracle, radius=args.radius)
    if args.primitive:
        X = primitive_filter(X)
    header = [f"x{i}" for i in range(spec.ambient_dim)]
    if args.format == "jsonl":
        _write(args, "".join(json.dumps([int(v) for v in row]) + "\n" for row in X))
        return
    rows = [{h: int(v) for h, v in zip(header, row)} for row in X]
    _emit(args, "enumerate", {"variety": spec.to_json(), "level": args.level,
                              "bound": args.bound}, header, rows, {"count": len(rows)})


def cmd_volume_arch(args) -> None:
    spec = spec_from_args(args)
    rows = []
    for T in args.grid:
        est = shell_volume(spec, args.level, T, epsilon=args.epsilon, samples=args.samples,
                           seed=args.seed, estimator=args.estimator)
        rows.append({"T": T, "value": est.value, "stderr": est.stderr})
    summary = {}
    if args.fit:
        fit = fit_power_log([(r["T"], r["value"]) for r in rows], min_points=3)
        summary["fit"] = fit.to_json()
    _emit(args, "volume-arch", {"variety": spec.to_json(), "level": args.level,
                                "seed": args.seed, "samples": args.samples},
          ["T", "value", "stderr"], rows, summary,
          [("volume", r["T"], r["value"]) for r in rows])


def cmd_volume_padic(args) -> None:
    spec = spec_from_args(args)
    p = args.prime
    params = {"variety": spec.to_json(), "p": p, "k_max": args.k_max}
    if args.sphere is None and args.ball is None:
        rec = local_density(spec, args.level, p, args.k_max)
        row = {"p": p, "k": rec.k, "count": rec.count, "numerator": rec.density.numerator,
               "denominator": rec.density.denominator, "stabilized": rec.stabilized}
        _emit(args, "local-density", dict(params, level=args.level), list(row), [row])
        return
    j_max = args.sphere if args.sphere is not None else args.ball
    func = padic_sphere_volume if args.sphere is not None else padic_ball_volume
    rows = []
    for j in range(j_max + 1):
        v = func(spec, p, j, args.k_max)
        rows.append({"j": j, "numerator": v.numerator, "denominator": v.denominator})
    _emit(args, "volume-padic", params, ["j", "numerator", "denominator"], rows)


def cmd_count(args) -> None:
    spec = spec_from_args(args)
    rep = ex.counting_experiment(spec, args.S, args.grid, samples=args.samples, seed=args.seed,
                                 epsilon=args.epsilon)
    rows = rep.rows()
    long = [(k, r["T"], r[k]) for r in rows for k in ("count", "volume", "ratio")]
    _emit(args, "count", {"variety": spec.to_json(), "S": list(args.S.finite_primes),
                          "grid": args.grid, "seed": args.seed, "samples": args.samples},
          ["T", "count", "volume", "volume_stderr", "ratio"], rows, rep.summary(), long)


def _regions(args, spec):
    if args.partition == "octants":
        return ex.octant_partition(spec.ambient_dim, args.region_radius)
    normal = [0.0] * spec.ambient_dim
    normal[0] = 1.0
    return ex.halfspace_pair(normal, args.offset, args.region_radius)


def cmd_equidist(args) -> None:
    spec = spec_from_args(args)
    regions = _regions(args, spec)
    rep = ex.equidist_experiment(spec, args.S, args.levels, regions, min_count=args.min_count,
                                 samples=args.samples, seed=args.seed, epsilon=args.epsilon)
    rows = [r.as_dict() for r in rep.rows]
    trend = rep.trend()
    summary = {"notes": rep.notes, "D_first": trend[0] if trend else None,
               "D_last": trend[1] if trend else None,
               "decreasing": bool(trend and trend[1] < trend[0])}
    _emit(args, "equidist", {"variety": spec.to_json(), "S": list(args.S.finite_primes),
                             "levels": args.levels, "partition": args.partition,
                             "seed": args.seed},
          ["m", "point_count", "empirical", "volume", "D", "eligible"], rows, summary,
          [("D", r["m"], r["D"]) for r in rows])


def cmd_denom(args) -> None:
    spec = spec_from_args(args)
    regions = _regions(args, spec)
    rep = ex.denominator_experiment(spec, args.prime, args.n, regions, samples=args.samples,
                                    seed=args.seed, epsilon=args.epsilon, k_max=args.k_max)
    rows = [r.as_dict() for r in rep.rows]
    header = ["n", "counts", "sphere_volume", "ball_volume", "count_over_sphere",
              "cumulative_over_ball", "empirical", "volume"]
    _emit(args, "denom", {"variety": spec.to_json(), "p": args.prime, "n": args.n,
                          "partition": args.partition, "seed": args.seed},
          header, rows, {"notes": rep.notes},
          [("count_over_sphere", r["n"], r["count_over_sphere"]) for r in rows])


def cmd_wellround(args) -> None:
    spec = spec_from_args(args)
    rep = ex.well_rounded_check(spec, args.grid, args.eps, S=args.S, samples=args.samples,
                                seed=args.seed, epsilon=args.epsilon)
    rows = [{"T": T, "eps": e, "ball": b, "shell": s} for T, e, b, s in rep.rows]
    _emit(args, "wellround", {"variety": spec.to_json(), "S": list(args.S.finite_primes),
                              "grid": args.grid, "eps": args.eps, "seed": args.seed},
          ["T", "eps", "ball", "shell"], rows, rep.summary(),
          [("shell_over_ball", f"{r['T']}/{r['eps']}", r["shell"] / r["ball"] if r["ball"]
            else float("nan")) for r in rows])


def _read_table(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_fit(args) -> None:
    table = _read_table(args.input)
    if not table:
        raise UsageError("input table is empty")
    cols = set(table[0])
    if {"j", "numerator", "denominator"} <= cols:
        series = [(int(r["j"]), float(Fraction(int(r["numerator"]), int(r["denominator"]))))
                  for r in table]
        if args.q is None:
            raise UsageError("--q is required for a p-adic series")
        res = structure_fit(series, args.q, max_period=args.max_period)
        rows = [{"residue": c.residue, "empty": c.empty,
                 "a": c.fit.a if c.fit else None, "b": c.fit.b if c.fit else None,
                 "c": c.fit.c if c.fit else None,
                 "residual_rms": c.fit.residual_rms if c.fit else None} for c in res.classes]
        _emit(args, "fit", {"input": args.input, "q": args.q},
              ["residue", "empty", "a", "b", "c", "residual_rms"], rows,
              {"period": res.period, "residual_rms": res.residual_rms})
        return
    if {"T", "value"} <= cols:
        grid = [(float(r["T"]), float(r["value"])) for r in table]
        fit = fit_power_log(grid, min_points=args.min_points)
        summary = {"fit": fit.to_json()}
        try:
            dbl = doubling_check(grid)
            summary["doubling"] = {"max_ratio": dbl.max_ratio, "growing": dbl.growing}
        except ValueError:
            pass
        _emit(args, "fit", {"input": args.input}, ["a", "b", "c", "residual_rms"],
              [fit.to_json()], summary)
        return
    raise UsageError("input needs columns T,value or j,numerator,denominator")


def cmd_ball_series(args) -> None:
    spec = spec_from_args(args)
    rows = []
    for T in args.grid:
        w = multi_prime_ball_volume(spec, args.S.finite_primes, T, args.k_max)
        rows.append({"T": T, "numerator": w.numerator, "denominator": w.denominator,
                     "value": float(w)})
    _emit(args, "ball-series", {"variety": spec.to_json(), "S": list(args.S.finite_primes)},
          ["T", "numerator", "denominator", "value"], rows)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcount",
                                     description="Counting and volumes on level sets f = m.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="integral points with f(x) = m in a box")
    _add_variety(p)
    p.add_argument("--level", type=_level, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--radius", type=float)
    p.add_argument("--primitive", action="store_true")
    p.add_argument("--oracle", action="store_true", help="full scan instead of pruned search")
    _add_output(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("volume-arch", help="real invariant volumes of norm balls")
    _add_variety(p)
    p.add_argument("--level", type=_level, default=1)
    p.add_argument("--grid", type=_float_list, required=True)
    p.add_argument("--estimator", choices=("conditional", "box"), default="conditional")
    p.add_argument("--fit", action="store_true", help="fit c T^a (log T)^b")
    _add_output(p, mc=True)
    p.set_defaults(func=cmd_volume_arch)

    p = sub.add_parser("volume-padic", help="local densities and p-adic sphere/ball volumes")
    _add_variety(p)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--level", type=_level, default=1)
    p.add_argument("--sphere", type=int, metavar="J", help="sphere volumes for j = 0..J")
    p.add_argument("--ball", type=int, metavar="J", help="ball volumes for j = 0..J")
    p.add_argument("--k-max", type=int, default=None)
    _add_output(p)
    p.set_defaults(func=cmd_volume_padic)

    p = sub.add_parser("ball-series", help="multi-prime ball volumes w_T")
    _add_variety(p)
    p.add_argument("--S", type=_primes, required=True)
    p.add_argument("--grid", type=_float_list, required=True)
    p.add_argument("--k-max", type=int, default=None)
    _add_output(p)
    p.set_defaults(func=cmd_ball_series)

    p = sub.add_parser("count", help="S-point counts against stratified volumes")
    _add_variety(p)
    p.add_argument("--S", type=_primes, default=PlaceSet())
    p.add_argument("--grid", type=_float_list, required=True)
    _add_output(p, mc=True)
    p.set_defaults(func=cmd_count)

    for name, func, help_text in (("equidist", cmd_equidist, "discrepancy of projected points"),
                                  ("denom", cmd_denom, "points with denominator p^n")):
        p = sub.add_parser(name, help=help_text)
        _add_variety(p)
        if name == "equidist":
            p.add_argument("--S", type=_primes, required=True)
            p.add_argument("--levels", type=_int_list, required=True)
            p.add_argument("--min-count", type=int, default=50)
        else:
            p.add_argument("--prime", type=int, required=True)
            p.add_argument("--n", type=_int_list, required=True, help='"0..6" or "1,2,3"')
            p.add_argument("--k-max", type=int, default=None)
        p.add_argument("--partition", choices=("octants", "halfspaces"),
                       default="octants" if name == "equidist" else "halfspaces")
        p.add_argument("--region-radius", type=float, default=1.0 if name == "equidist" else 2.0)
        p.add_argument("--offset", type=float, default=0.5,
                       help="offset of the x0 halfspace split")
        _add_output(p, mc=True)
        p.set_defaults(func=func)

    p = sub.add_parser("wellround", help="boundary-shell exponent of height balls")
    _add_variety(p)
    p.add_argument("--S", type=_primes, default=PlaceSet())
    p.add_argument("--grid", type=_float_list, required=True)
    p.add_argument("--eps", type=_float_list, default=[0.05, 0.1, 0.2])
    _add_output(p, mc=True)
    p.set_defaults(func=cmd_wellround)

    p = sub.add_parser("fit", help="fit a T,value grid or a j,numerator,denominator series")
    p.add_argument("--input", required=True)
    p.add_argument("--q", type=int, help="base of the p-adic series")
    p.add_argument("--max-period", type=int, default=2)
    p.add_argument("--min-points", type=int, default=3)
    _add_output(p)
    p.set_defaults(func=cmd_fit)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (UsageError, ValueError) as err:
        print(f"symcount {args.command}: error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001
        print(f"symcount {args.command}: failed: {err}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
