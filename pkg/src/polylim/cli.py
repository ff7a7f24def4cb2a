"""``polylim`` command line: enumeration oracles, exact series, limit tables, Monte Carlo.

Every command writes a table (CSV by default, ``--format json`` for a JSON
list of records) to standard output or to ``--out``.  With ``--out`` a
``<out>.manifest.json`` is written next to it holding the parameters,
versions, wall time and the sha256 of the output.  Exact numbers are always
written as strings.

Exit codes: 0 success, 2 bad input or size guard, 3 failed exact
verification, 4 failed statistical check.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import tempfile
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import asymptotics as asy
from . import montecarlo as mc
from . import polygons as pg
from . import series as ser
from . import walks as wk
from .scalar import ExactScalar

EXIT_OK, EXIT_GUARD, EXIT_VERIFY, EXIT_STAT = 0, 2, 3, 4


class VerificationFailed(Exception):
    pass


class StatisticalFailure(Exception):
    pass


# --- output -------------------------------------------------------------------------


def _exact(x) -> str:
    if isinstance(x, ExactScalar):
        return str(x)
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def render(header, rows, fmt: str) -> str:
    rows = [list(r) for r in rows]
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _versions() -> dict:
    import numba
    import numpy
    import scipy

    return {"polylim": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def emit(args, text: str, started: float, extra: dict | None = None) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    atomic_write(out, text)
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "command": args.command,
        "parameters": params,
        "versions": _versions(),
        "wall_time_s": round(time.time() - started, 3),
        "outputs": {out.name: hashlib.sha256(text.encode()).hexdigest()},
    }
    if extra:
        manifest.update(extra)
    atomic_write(out.with_name(out.name + ".manifest.json"), json.dumps(manifest, indent=1, default=str) + "\n")


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _index(text: str | None, M: int) -> tuple[int, ...]:
    if text is None:
        return (1,) * M
    parts = [int(p) for p in str(text).replace(" ", "").split(",") if p != ""]
    if len(parts) == 1 and M > 1:
        parts = parts * M
    return asy._mi(parts, M)


# --- commands -----------------------------------------------------------------------


def cmd_enumerate(args) -> str:
    """One row per object with its moments; ``--histogram`` groups equal moment rows."""
    model = args.model
    kmax = args.kmax or 2
    rows = []
    if model in ("staircase", "staircase-diagonal"):
        if args.n0 is None:
            raise ValueError("--n0 is required")
        header = ["object", "n0", *[f"n{k}" for k in range(1, kmax + 1)]]
        for p in pg.enumerate_staircase(args.n0):
            mv = pg.diagonal_moments(p, kmax)
            rows.append([p.to_lattice().steps, args.n0, *mv.values[1:]])
    elif model == "sap":
        if args.perimeter is None:
            raise ValueError("--perimeter is required")
        header = ["object", "perimeter", *[f"a{k}" for k in range(1, kmax + 1)],
                  *[f"b{k}" for k in range(1, kmax + 1)]]
        for p in pg.enumerate_sap(args.perimeter):
            a, b = pg.layer_moments(p, kmax)
            rows.append([p.steps, args.perimeter, *a.values[1:], *b.values[1:]])
    else:
        wm = wk.WalkModel(ser.EquationModel.parse(model).value)
        if args.length is None:
            raise ValueError("--length is required")
        header = ["object", "length", *[f"n{k}" for k in range(1, kmax + 1)]]
        for s, mom in wk.enumerate_walks(wm, args.length, kmax):
            rows.append([s, *mom])
    if args.histogram:
        hist = Counter(tuple(r[1:]) for r in rows)
        return render(header[1:] + ["count"], [[*k, c] for k, c in sorted(hist.items())], args.format)
    return render(header + ["count"], [r + [1] for r in rows], args.format)


def cmd_series(args) -> str:
    N = args.N or 12
    if args.check_H_equals_G:
        ok = ser.verify_H_equals_G(N)
        text = render(["check", "N", "result"], [["H_equals_G", N, "pass" if ok else "fail"]], args.format)
        if not ok:
            raise VerificationFailed(text)
        return text
    model = ser.EquationModel.parse(args.model or "staircase-diagonal")
    M = args.M or 1
    y = Fraction(args.y) if args.y is not None else None
    if args.verify:
        s = ser.solve_qfe(model, M, N, y)
        res = ser.verify_feq(model, s)
        text = render(["model", "M", "N", "residual"], [[model.value, M, N, "0" if res.is_zero() else "nonzero"]],
                      args.format)
        if not res.is_zero():
            raise VerificationFailed(text)
        return text
    if args.k is not None:
        k = _index(args.k, M)
        g = ser.factorial_mgf_series(model, k, N, M=M, y=y)
        rows = [[n, _exact(c)] for n, c in enumerate(g.coeffs)]
        if args.moments:
            header = ["n", "g_k", "count", "factorial_moment", "moment", "moment_float"]
            out = []
            for n, c in rows:
                try:
                    fm = ser.finite_moments(model, k, n, M=M, y=y)
                except ser.ZeroCount:
                    out.append([n, c, 0, "", "", ""])
                    continue
                out.append([n, c, _exact(fm.count), _exact(fm.factorial), _exact(fm.ordinary), float(fm.ordinary)])
            return render(header, out, args.format)
        return render(["n", "g_k"], rows, args.format)
    s = ser.solve_qfe(model, M, N, y)
    rows = [[n, *e, _exact(c)] for n, poly in enumerate(s.coeffs) for e, c in sorted(poly.items())]
    names = (["width"] if model is ser.EquationModel.STAIRCASE_COLUMN else []) + [f"e{i}" for i in range(1, M + 1)]
    return render(["n", *names, "coeff"], rows, args.format)


def cmd_limits(args) -> str:
    model = ser.EquationModel.parse(args.model or "staircase-diagonal")
    M = args.M or 1
    kmax = _index(args.kmax, M)
    y = Fraction(args.y) if args.y is not None else None
    if max(kmax) > asy.MAX_COMPONENT:
        raise ValueError(f"kmax components must be <= {asy.MAX_COMPONENT}")
    table = asy.amplitudes(model, M, kmax, y)
    header = [*[f"k{i}" for i in range(1, M + 1)], "gamma", "c", "f", "f_q", "f_pi_half", "f_sqrt2",
              "f_float", "moment", "moment_float", "ratio", "ratio_float", "alpha_sq"]
    means = {}
    for i in range(1, M + 1):
        e = asy._unit(i, M)
        if all(a <= b for a, b in zip(e, kmax)):
            means[i] = asy.limit_moment(model, e, y)
    rows = []
    for k, g, c, f in table.rows():
        m = asy.limit_moment(model, k, y)
        if model in asy.POLYGON_MODELS:
            ratio = asy.limit_moment_ratio(k)
        elif all(i in means for i, x in enumerate(k, start=1) if x):
            ratio = m
            for i, x in enumerate(k, start=1):
                if x:
                    ratio = ratio / means[i] ** x
        else:
            ratio = None
        alpha_sq = ""
        if model in asy.POLYGON_MODELS and sum(k) == 1:
            alpha_sq = _exact(asy.alpha(k.index(1) + 1, model, M, y).squared)
        rows.append([*k, _exact(g), _exact(c), str(f), _exact(f.q), f.h, f.s, float(f), str(m), f"{float(m):.6f}",
                     "" if ratio is None else str(ratio), "" if ratio is None else f"{float(ratio):.6f}", alpha_sq])
    return render(header, rows, args.format)


def _n0_list(args) -> list[int]:
    if args.n0 is not None:
        return [int(x) for x in str(args.n0).split(",")]
    if args.perimeter is not None:
        return [int(x) // 2 for x in str(args.perimeter).split(",")]
    raise ValueError("--n0 or --perimeter is required")


def cmd_mc(args) -> str:
    configs = [mc.McConfig(n0, args.samples, args.sweep_factor, args.seed, args.kmax or 2, args.family)
               for n0 in _n0_list(args)]
    results = mc.mc_run_many(configs, _progress)
    rows = [r for res in results for r in res.rows()]
    for res in results:
        _progress(f"n0={res.config.n0}: acceptance {res.accepted / max(res.proposed, 1):.3f}")
    return render(mc.CSV_HEADER, rows, args.format)


def cmd_uniformity(args) -> str:
    rows = []
    failed = False
    for n0 in _n0_list(args):
        r = mc.chi_square_uniformity(n0, args.samples, args.seed, reflections=not args.no_reflections)
        ok = r.n_classes == 1 or 0.001 < r.p_value < 0.999
        failed |= not ok
        rows.append([2 * n0, r.measurements, r.n_classes, r.visited, r.statistic, r.dof, r.p_value,
                     "pass" if ok else "fail"])
    text = render(["perimeter", "measurements", "classes", "visited", "chi2", "dof", "p_value", "result"],
                  rows, args.format)
    if failed:
        raise StatisticalFailure(text)
    return text


def read_ratio_points(path) -> dict[tuple[str, str, int], list[tuple[int, float, float]]]:
    groups: dict[tuple[str, str, int], list[tuple[int, float, float]]] = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            if row.get("quantity", "ratio") != "ratio":
                continue
            key = (row["family"], row["variant"], int(row["k"]))
            groups.setdefault(key, []).append((int(row["n0"]), float(row["estimate"]), float(row["stderr"])))
    return groups


def cmd_extrapolate(args) -> str:
    groups = read_ratio_points(args.input)
    rows, series = [], []
    for (fam, var, k), pts in sorted(groups.items()):
        points = [mc.RatioSeriesPoint(1 / (2 * n0), y, 1 / e**2 if e > 0 else 1.0) for n0, y, e in sorted(pts)]
        fit = mc.extrapolate(points)
        rows.append([fam, var, k, len(points), fit.intercept, fit.intercept_stderr, fit.slope, fit.residual])
        series.append(f"# {fam} {var} k={k}: y = {fit.intercept:.6f} + {fit.slope:.6f} x")
        series.extend(f"{p.x:.8g} {p.y:.8g} {p.weight ** -0.5:.3g}" for p in points)
        series.append("\n")
    if args.series:
        atomic_write(Path(args.series), "\n".join(series))
    return render(["family", "variant", "k", "points", "intercept", "intercept_stderr", "slope", "residual"],
                  rows, args.format)


def cmd_repro(args) -> str:
    """series -> limits -> mc -> extrapolate at desk scale, files under ``--out`` (a directory)."""
    out = Path(args.out or "repro")
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    ns = argparse.Namespace
    steps = [
        ("series_staircase.csv", cmd_series, ns(command="series", model="staircase-diagonal", M=1, N=12, y=None,
                                              k=None, verify=False, check_H_equals_G=False, moments=False,
                                              format="csv")),
        ("series_area_moments.csv", cmd_series, ns(command="series", model="staircase-diagonal", M=1, N=12, y=None,
                                                 k="1", verify=False, check_H_equals_G=False, moments=True,
                                                 format="csv")),
        ("limits_M1.csv", cmd_limits, ns(command="limits", model="staircase-diagonal", M=1, kmax="4", y=None,
                                        format="csv")),
        ("limits_M2.csv", cmd_limits, ns(command="limits", model="staircase-diagonal", M=2, kmax="2,2", y=None,
                                        format="csv")),
    ]
    for model in ("dyck", "bilateral-dyck", "meander", "bernoulli"):
        steps.append((f"limits_{model}.csv", cmd_limits, ns(command="limits", model=model, M=2, kmax="2,2", y=None,
                                                            format="csv")))
    summary = []
    for name, fn, a in steps:
        text = fn(a)
        atomic_write(out / name, text)
        summary.append([name, hashlib.sha256(text.encode()).hexdigest()])
    perims = [int(p) for p in str(args.perimeter or "64,128,256,512").split(",")]
    mc_args = ns(command="mc", n0=",".join(str(p // 2) for p in perims), perimeter=None, samples=args.samples,
                 sweep_factor=args.sweep_factor, seed=args.seed, kmax=2, family="both", format="csv")
    text = cmd_mc(mc_args)
    atomic_write(out / "mc.csv", text)
    summary.append(["mc.csv", hashlib.sha256(text.encode()).hexdigest()])
    ex_args = ns(command="extrapolate", input=str(out / "mc.csv"), series=str(out / "mc_series.dat"), format="csv")
    text = cmd_extrapolate(ex_args)
    atomic_write(out / "extrapolate.csv", text)
    summary.append(["extrapolate.csv", hashlib.sha256(text.encode()).hexdigest()])
    _progress(f"repro finished in {time.time() - started:.1f} s")
    return render(["file", "sha256"], summary, args.format)


# --- entry point ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (directory for repro)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="polylim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", parents=[common], help="brute-force oracle tables")
    e.add_argument("--model", required=True,
                   choices=("staircase", "staircase-diagonal", "sap", "dyck", "bilateral-dyck", "bilateral",
                            "meander", "bernoulli"))
    e.add_argument("--n0", type=int)
    e.add_argument("--perimeter", type=int)
    e.add_argument("--length", type=int)
    e.add_argument("--kmax", type=int)
    e.add_argument("--histogram", action="store_true", help="group objects with equal moments")
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("series", parents=[common], help="exact series from the functional equations")
    s.add_argument("--model")
    s.add_argument("--M", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--k", help="factorial moment index, e.g. 1 or 0,2")
    s.add_argument("--y", help="column-model height weight (rational)")
    s.add_argument("--moments", action="store_true", help="with --k: add exact finite-size moments")
    s.add_argument("--verify", action="store_true", help="check the functional equation residual")
    s.add_argument("--check-H-equals-G", dest="check_H_equals_G", action="store_true")
    s.set_defaults(func=cmd_series)

    lm = sub.add_parser("limits", parents=[common], help="exponents, amplitudes and limit moments")
    lm.add_argument("--model")
    lm.add_argument("--M", type=int)
    lm.add_argument("--kmax", help="largest multi-index, e.g. 2 or 0,2")
    lm.add_argument("--y", help="column-model height weight, a rational fourth power")
    lm.set_defaults(func=cmd_limits)

    m = sub.add_parser("mc", parents=[common], help="Monte Carlo layer moments of self-avoiding polygons")
    m.add_argument("--n0", help="half-perimeter(s), comma separated")
    m.add_argument("--perimeter", help="perimeter(s), comma separated")
    m.add_argument("--samples", type=int, default=100_000)
    m.add_argument("--sweep-factor", dest="sweep_factor", type=int, default=10)
    m.add_argument("--seed", type=int, default=1)
    m.add_argument("--kmax", type=int)
    m.add_argument("--family", choices=("diagonal", "vertical", "both"), default="both")
    m.set_defaults(func=cmd_mc)

    u = sub.add_parser("uniformity", parents=[common], help="chi-square test of the sampler at small perimeter")
    u.add_argument("--n0")
    u.add_argument("--perimeter", default="8,12")
    u.add_argument("--samples", type=int, default=1_000_000)
    u.add_argument("--seed", type=int, default=1)
    u.add_argument("--no-reflections", dest="no_reflections", action="store_true")
    u.set_defaults(func=cmd_uniformity)

    x = sub.add_parser("extrapolate", parents=[common], help="weighted linear fit in 1/(2 n0)")
    x.add_argument("input", help="CSV written by the mc command")
    x.add_argument("--series", help="also write a plot-ready 'x y stderr' file")
    x.set_defaults(func=cmd_extrapolate)

    r = sub.add_parser("repro", parents=[common], help="series, limits, mc and extrapolate in one go")
    r.add_argument("--perimeter", help="default 64,128,256,512")
    r.add_argument("--samples", type=int, default=100_000)
    r.add_argument("--sweep-factor", dest="sweep_factor", type=int, default=10)
    r.add_argument("--seed", type=int, default=1)
    r.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        text = args.func(args)
        if args.command == "repro":
            sys.stdout.write(text)
            out = Path(args.out or "repro")
            manifest = {"command": "repro", "parameters": {k: v for k, v in vars(args).items() if k != "func"},
                        "versions": _versions(), "wall_time_s": round(time.time() - started, 3),
                        "outputs": dict(row.split(",") for row in text.splitlines()[1:])}
            atomic_write(out / "manifest.json", json.dumps(manifest, indent=1) + "\n")
            return EXIT_OK
    except VerificationFailed as exc:
        sys.stdout.write(str(exc))
        return EXIT_VERIFY
    except StatisticalFailure as exc:
        sys.stdout.write(str(exc))
        return EXIT_STAT
    except (ValueError, pg.SizeLimitExceeded) as exc:
        print(f"polylim: error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    emit(args, text, started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
