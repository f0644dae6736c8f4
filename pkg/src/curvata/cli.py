"""Command-line front end: single queries, CSV parameter sweeps and the acceptance suite.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import CurvataError, InsufficientInput, InvalidInput, NumericalFailure
from .spaceform import SpaceForm
from .spectral import tube_mode_eigenvalue
from .stability import (CapSpec, Subspace, TubeSpec, cap_morse_index, cap_verdict,
                        tube_verdict)
from .symfunc import CurvatureVector, maclaurin_report, positivity_check, profile

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3

TUBE_COLUMNS = ["n", "r", "c", "R", "l", "label", "margin", "mode", "eigenvalue",
                "criterion_lhs", "criterion_rhs"]
CAP_COLUMNS = ["n", "c", "rho0", "r", "kappa", "theta", "N", "l_max", "lambda1", "lambda2",
               "lambda2_multiplicity", "index_full", "index_mean_zero", "resolvent_integral",
               "label", "case"]

TUBE_HELP = """\
Mode table CSV columns (--modes):
  j            harmonic degree on the cross-section sphere
  m            axial Neumann mode cos(m pi t / l)
  eigenvalue   eigenvalue of the r-stability operator on that mode
"""

CAP_HELP = """\
Spectrum CSV columns (--csv):
  l             angular mode (spherical harmonic degree)
  k             radial index within the mode, 1-based
  eigenvalue    discrete eigenvalue of the r-index form
  multiplicity  spherical-harmonic multiplicity of mode l
"""

SWEEP_HELP = f"""\
The config is one JSON object with flat keys named like the command's flags.
A key whose value is a list [start, stop, steps] is a sweep axis (at most two;
steps >= 1, points from numpy.linspace). Extra keys: "command" ("tube" or
"cap"), "output" (CSV path, default stdout), "threads".
Rows are emitted row-major over the axes in the order they appear in the file.

Example: {{"command": "tube", "n": 3, "r": 0, "c": 0, "R": [0.2, 2, 10], "l": [0.5, 5, 10]}}

tube columns: {", ".join(TUBE_COLUMNS)}
  label        Stable / Unstable / Inconclusive
  margin       pi sn_c(R) - l sqrt(n-r-1)
  mode         deciding mode (j,m)
  eigenvalue   eigenvalue of that mode
  criterion_*  the two sides of the threshold test
cap columns: {", ".join(CAP_COLUMNS)}
  index_*      Morse index on all / mean-zero test functions
  label, case  Koiso-type verdict and the case that decided it

CURVATA_THREADS caps the number of worker threads.
Floats are written with 17 significant digits.
"""


def _fmt(x) -> str:
    """Compact human-readable number."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return f"{0.0 if x == 0 else x:.12g}"


def _csv_value(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def _write_csv(rows, columns, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_value(row[c]) for c in columns])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _parse_kappa(text: str) -> CurvatureVector:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InvalidInput(f"cannot parse curvatures {text!r}") from exc
    return CurvatureVector(values)


def cmd_symcheck(args) -> int:
    kv = _parse_kappa(args.kappa)
    r = args.r
    if not 0 <= r <= kv.n - 1:
        raise InvalidInput(f"--r must lie in 0..{kv.n - 1}")
    prof = profile(kv)
    join = lambda xs: ",".join(_fmt(x) for x in xs)  # noqa: E731
    tr = prof.traces[r]
    print(f"kappa: {join(kv.kappa)}")
    print(f"S: {join(prof.S)}")
    print(f"H: {join(prof.H)}")
    print(f"newton: {join(prof.newton[r])}; trP{r}: {_fmt(tr[0])}; "
          f"trP{r}A: {_fmt(tr[1])}; trP{r}A2: {_fmt(tr[2])}")
    print(f"trace residuals: {join(prof.trace_residuals()[r])}")
    print(f"tau: {join(prof.tau)}")
    rep = maclaurin_report(kv)
    if rep.applicable:
        print("maclaurin: " + "; ".join(f"{e.ident}={_fmt(e.margin)}" for e in rep.entries))
    else:
        print(f"maclaurin: not applicable ({rep.reason})")
    print(f"positivity: {positivity_check(kv, r)}")
    return EXIT_OK


def _criterion_text(t: TubeSpec) -> str:
    if t.c > 0:
        lhs = "pi*sin(R*sqrt(c))/sqrt(c)"
    elif t.c < 0:
        lhs = "pi*sinh(R*sqrt(-c))/sqrt(-c)"
    else:
        lhs = "pi*R"
    return f"criterion: {lhs} >= l*sqrt(n-r-1)"


def _tube_row(t: TubeSpec) -> dict:
    v = tube_verdict(t)
    return {"n": t.n, "r": t.r, "c": t.c, "R": t.R, "l": t.l, "label": str(v.label),
            "margin": v.margin, "mode": "(0,1)", "eigenvalue": v.witness_value,
            "criterion_lhs": math.pi * SpaceForm(t.c).sn(t.R),
            "criterion_rhs": t.l * math.sqrt(t.n - t.r - 1)}


def cmd_tube(args) -> int:
    t = TubeSpec(args.n, args.r, args.R, args.l, args.c)
    row = _tube_row(t)
    eig = "nan" if row["eigenvalue"] is None else f"{row['eigenvalue']:.6g}"
    print(f"{row['label']} margin={row['margin']:.4f} mode={row['mode']} eigenvalue={eig}")
    print(_criterion_text(t) + f"  ({row['criterion_lhs']:.6g} vs {row['criterion_rhs']:.6g})")
    if args.modes is not None:
        jmax, mmax = args.modes
        sf = SpaceForm(t.c)
        rows = [{"j": j, "m": m, "eigenvalue": tube_mode_eigenvalue(t.n, t.r, sf, t.R, t.l, j, m)}
                for j in range(jmax + 1) for m in range(mmax + 1)]
        _write_csv(rows, ["j", "m", "eigenvalue"], args.csv)
    return EXIT_OK


def _cap_row(p: dict) -> dict:
    cs = CapSpec(p["n"], p["c"], p["rho0"], p.get("theta", math.pi / 2), p.get("robin"))
    kw = dict(N=p["N"], l_max=p["l_max"], r=p["r"], kappa=p["kappa"])
    full = cap_morse_index(cs, Subspace.FULL, **kw)
    mean_zero = cap_morse_index(cs, Subspace.MEAN_ZERO, **kw)
    try:
        v = cap_verdict(full)
        label, case = str(v.label), v.case
    except InsufficientInput:
        label, case = "Inconclusive", None
    return {"n": cs.n, "c": cs.c, "rho0": cs.rho0, "r": p["r"], "kappa": p["kappa"],
            "theta": cs.theta, "N": p["N"], "l_max": p["l_max"], "lambda1": full.lambda1,
            "lambda2": full.lambda2, "lambda2_multiplicity": full.lambda2_multiplicity,
            "index_full": full.index, "index_mean_zero": mean_zero.index,
            "resolvent_integral": full.resolvent_integral, "label": label, "case": case,
            "_table": full.table}


def cmd_cap(args) -> int:
    row = _cap_row(vars(args))
    print(f"lambda1: {row['lambda1']:.10g}")
    print(f"lambda2: {row['lambda2']:.10g} (multiplicity {row['lambda2_multiplicity']})")
    print(f"index Full: {row['index_full']}")
    print(f"index MeanZero: {row['index_mean_zero']}")
    print(f"resolvent integral: {row['resolvent_integral']:.10g}")
    print(f"verdict: {row['label']} (case {row['case']})")
    if args.csv is not None:
        rows = [dict(zip(["l", "k", "eigenvalue", "multiplicity"], t)) for t in row["_table"]]
        _write_csv(rows, ["l", "k", "eigenvalue", "multiplicity"], args.csv)
    return EXIT_OK


SWEEP_DEFAULTS = {
    "tube": {"c": 0.0},
    "cap": {"r": 0, "kappa": 1.0, "N": 2048, "l_max": 3, "theta": math.pi / 2, "robin": None},
}
SWEEP_REQUIRED = {"tube": ["n", "r", "R", "l"], "cap": ["n", "c", "rho0"]}
INTEGER_KEYS = {"n", "r", "N", "l_max"}


def _sweep_points(config: dict):
    if not isinstance(config, dict):
        raise InvalidInput("sweep config must be a JSON object")
    config = dict(config)
    command = config.pop("command", None)
    if command not in SWEEP_DEFAULTS:
        raise InvalidInput(f"command must be one of {sorted(SWEEP_DEFAULTS)}, got {command!r}")
    output = config.pop("output", None)
    threads = config.pop("threads", None)
    allowed = set(SWEEP_DEFAULTS[command]) | set(SWEEP_REQUIRED[command])
    unknown = set(config) - allowed
    if unknown:
        raise InvalidInput(f"unknown keys for {command}: {sorted(unknown)}")
    missing = [k for k in SWEEP_REQUIRED[command] if k not in config]
    if missing:
        raise InvalidInput(f"missing keys for {command}: {missing}")
    fixed = dict(SWEEP_DEFAULTS[command])
    axes = []
    for key, value in config.items():
        if isinstance(value, list):
            if len(value) != 3:
                raise InvalidInput(f"axis {key!r} must be [start, stop, steps]")
            start, stop, steps = value
            if any(isinstance(b, bool) or not isinstance(b, (int, float)) for b in (start, stop)):
                raise InvalidInput(f"axis {key!r}: start and stop must be numbers")
            if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
                raise InvalidInput(f"axis {key!r}: steps must be an integer >= 1")
            pts = np.linspace(float(start), float(stop), steps)
            if key in INTEGER_KEYS:
                if not np.allclose(pts, np.round(pts)):
                    raise InvalidInput(f"axis {key!r} must hit integers")
                pts = [int(round(v)) for v in pts]
            else:
                pts = [float(v) for v in pts]
            axes.append((key, pts))
        else:
            fixed[key] = _coerce(key, value)
    if len(axes) > 2:
        raise InvalidInput("at most two sweep axes are supported")
    points = []
    for combo in itertools.product(*(pts for _, pts in axes)):
        p = dict(fixed)
        p.update(zip((k for k, _ in axes), combo))
        points.append(p)
    return command, points, output, threads


def _coerce(key, value):
    if key == "robin" and value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInput(f"{key!r} must be a number, got {value!r}")
    if key in INTEGER_KEYS:
        if int(value) != value:
            raise InvalidInput(f"{key!r} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _validate_point(command, p):
    if command == "tube":
        return TubeSpec(p["n"], p["r"], p["R"], p["l"], p["c"])
    cs = CapSpec(p["n"], p["c"], p["rho0"], p["theta"], p["robin"])
    if not (isinstance(p["N"], int) and p["N"] >= 64):
        raise InvalidInput(f"N must be an integer >= 64, got {p['N']!r}")
    return cs


def _thread_count(requested) -> int:
    env = os.environ.get("CURVATA_THREADS")
    cap = os.cpu_count() or 1
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise InvalidInput(f"CURVATA_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise InvalidInput("CURVATA_THREADS must be >= 1")
    if requested is not None:
        if not isinstance(requested, int) or requested < 1:
            raise InvalidInput("threads must be an integer >= 1")
        cap = min(cap, requested)
    return cap


def cmd_sweep(args) -> int:
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read config {args.config!r}: {exc}") from exc
    command, points, output, threads = _sweep_points(config)
    if args.output is not None:
        output = args.output
    for p in points:
        _validate_point(command, p)
    workers = _thread_count(threads)
    evaluate = _tube_row if command == "tube" else _cap_row
    if command == "tube":
        items = [_validate_point(command, p) for p in points]
    else:
        items = points
    # map() yields in submission order, so the CSV order never depends on scheduling
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(evaluate, items))
    columns = TUBE_COLUMNS if command == "tube" else CAP_COLUMNS
    _write_csv(rows, columns, output)
    if output not in (None, "-"):
        print(f"wrote {len(rows)} rows to {output}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_all

    numbers = None
    if args.only:
        try:
            numbers = [int(x) for x in args.only.split(",")]
        except ValueError as exc:
            raise InvalidInput(f"cannot parse --only {args.only!r}") from exc
        if any(n < 1 or n > 10 for n in numbers):
            raise InvalidInput("criteria are numbered 1..10")
    results = run_all(numbers)
    for res in results:
        print(res.line())
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="curvata", description=__doc__, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("symcheck", help="symmetric functions and Newton data of a curvature vector",
                       formatter_class=fmt)
    p.add_argument("--kappa", required=True, help="comma-separated principal curvatures")
    p.add_argument("--r", type=int, default=0, help="order of the Newton transformation")
    p.set_defaults(func=cmd_symcheck)

    p = sub.add_parser("tube", help="stability verdict for a free-boundary tube",
                       epilog=TUBE_HELP, formatter_class=fmt)
    p.add_argument("--n", type=int, required=True, help="dimension of the space form M^n(c)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--c", type=float, default=0.0, help="sectional curvature")
    p.add_argument("--R", type=float, required=True, help="radius of the cross-section")
    p.add_argument("--l", type=float, required=True, help="height of the slab")
    p.add_argument("--modes", type=int, nargs=2, metavar=("JMAX", "MMAX"),
                   help="also write the mode table for j <= JMAX, m <= MMAX")
    p.add_argument("--csv", default="-", help="mode table path (default stdout)")
    p.set_defaults(func=cmd_tube)

    p = sub.add_parser("cap", help="Morse indices of a geodesic cap", epilog=CAP_HELP,
                       formatter_class=fmt)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True, help="intrinsic curvature of the cap")
    p.add_argument("--rho0", type=float, required=True, help="geodesic radius")
    p.add_argument("--N", type=int, default=2048, help="radial grid size")
    p.add_argument("--l-max", dest="l_max", type=int, default=3)
    p.add_argument("--r", type=int, default=0)
    p.add_argument("--kappa", type=float, default=1.0, help="umbilicity factor")
    p.add_argument("--theta", type=float, default=math.pi / 2, help="contact angle")
    p.add_argument("--robin", type=float, default=None,
                   help="override the Robin coefficient (default cn/sn(rho0))")
    p.add_argument("--csv", default=None, help="write the spectrum table ('-' for stdout)")
    p.set_defaults(func=cmd_cap)

    p = sub.add_parser("sweep", help="evaluate a parameter grid from a JSON config",
                       epilog=SWEEP_HELP, formatter_class=fmt)
    p.add_argument("config", help="path to the JSON config")
    p.add_argument("--output", default=None, help="override the config's output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CurvataError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
