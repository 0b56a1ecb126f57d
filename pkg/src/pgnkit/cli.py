"""Command-line front end: ``pgn <command> ...`` or ``python3 -m pgnkit``.

Every command writes to ``--out`` (standard output by default) and is
deterministic: the same arguments give byte-identical output.  Exit codes
are 0 on success, 2 for usage errors and failed preconditions (including
an invalid template given to ``template validate``), 1 for anything
unexpected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import mpmath
import numpy as np

from .template_builders import build_fk
from .template_core import Dims, dumps_template, format_rational, loads_template, path_from_samples
from .errors import InvariantError, PGNError
from .lattice_dynamics import (DEFAULT_BUDGET, DEFAULT_DT, DEFAULT_HORIZON, Lattice, MinimaTrace,
                               compare_trace_to_template, identity_lattice, log_minima_trace,
                               make_lattice_from_A, occupation_fraction, random_lattice,
                               singularity_probe, theta_from_partial_quotients, time_grid)
from .score_engine import score_template

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# output helpers


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror}") from exc


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load_template(path: str):
    try:
        return loads_template(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not JSON: {exc}") from exc


def _breakpoint_rows(path):
    return [[format_rational(t)] + [format_rational(v) for v in row]
            for t, row in zip(path.breakpoints, path.values)]


def _breakpoint_csv(path) -> str:
    header = ["t"] + [f"f_{i}" for i in range(1, path.d + 1)]
    return _csv(header, _breakpoint_rows(path))


def _rational(text: str, flag: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{flag} expects an integer, decimal or p/q, got {text!r}") from exc


def _fmt(args, default: str) -> str:
    return args.format or default


# --------------------------------------------------------------------------
# lattice sources


def _number(text: str, dps):
    try:
        if "/" in text:
            return Fraction(text)
        if dps:
            with mpmath.workdps(dps):
                return mpmath.mpf(text)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _lattice(args) -> Lattice:
    chosen = [name for name in ("lattice", "theta", "cf", "identity", "random")
              if getattr(args, name) not in (None, False)]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --lattice, --theta, --cf, --identity, --random")
    dps = args.dps
    if dps is not None and dps < 15:
        raise UsageError("--dps must be at least 15")
    src = chosen[0]
    if src == "lattice":
        try:
            data = json.loads(_read(args.lattice))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.lattice} is not JSON: {exc}") from exc
        return Lattice.from_dict(data, dps)
    if src == "cf":
        try:
            quotients = [int(a) for a in args.cf.split(",") if a.strip()]
        except ValueError as exc:
            raise UsageError("--cf expects comma-separated positive integers") from exc
        if not quotients or min(quotients) < 1:
            raise UsageError("--cf expects comma-separated positive integers")
        dps = dps or 60
        return make_lattice_from_A([[theta_from_partial_quotients(quotients, dps=dps)]],
                                   Dims(1, 1), dps)
    dims = _dims(args)
    if src == "identity":
        return identity_lattice(dims, dps)
    if src == "random":
        if dps:
            raise UsageError("--random lattices are binary64 only")
        return random_lattice(dims, np.random.default_rng(args.seed))
    values = [_number(v, dps) for v in args.theta]
    if len(values) != dims.m * dims.n:
        raise UsageError(f"--theta needs m*n = {dims.m * dims.n} values, got {len(values)}")
    A = np.array(values, dtype=object).reshape(dims.m, dims.n)
    return make_lattice_from_A(A, dims, dps)


def _dims(args) -> Dims:
    if args.m is None or args.n is None:
        raise UsageError("--m and --n are required for this lattice source")
    return Dims(args.m, args.n)


def _add_lattice_args(p) -> None:
    p.add_argument("--lattice", metavar="JSON", help="lattice file {m, n, basis}")
    p.add_argument("--theta", nargs="+", metavar="V",
                   help="entries of A (row-major, m*n values); p/q strings are exact")
    p.add_argument("--cf", metavar="A1,A2,...",
                   help="theta from partial quotients [0; a1, a2, ...], (m, n) = (1, 1)")
    p.add_argument("--identity", action="store_true", help="the lattice Z^d")
    p.add_argument("--random", action="store_true", help="random unimodular lattice from --seed")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--dps", type=int, help="carry the basis at this many decimal digits")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=None)


# --------------------------------------------------------------------------
# commands


def cmd_template_build(args) -> str:
    if args.k < 0:
        raise UsageError("--k must be >= 0")
    lt = build_fk(Dims(args.m, args.n), args.k, _rational(args.horizon, "--horizon"))
    if args.emit_csv:
        _emit(_breakpoint_csv(lt.path), args.emit_csv)
    if _fmt(args, "json") == "csv":
        return _breakpoint_csv(lt.path)
    return dumps_template(lt)


def cmd_template_validate(args):
    t = _load_template(args.template)
    report = t.report if hasattr(t, "report") else t.template.report
    doc = report.to_dict()
    if _fmt(args, "json") == "csv":
        rows = [[v["axiom"], v["component"], v["time"],
                 "" if v["interval"] is None else " ".join(v["interval"]), v["detail"]]
                for v in doc["violations"]]
        text = _csv(["axiom", "component", "time", "interval", "detail"], rows)
    else:
        text = _json(doc)
    return text, (EXIT_OK if report.ok else EXIT_USAGE)


def cmd_score(args) -> str:
    t = _load_template(args.template)
    tpl = t if hasattr(t, "report") else t.template
    if not tpl.report.ok:
        v = tpl.report.violations[0]
        raise UsageError(f"template fails axiom ({v.axiom}): {v.detail}")
    report = score_template(t, None if args.T is None else _rational(args.T, "--T"))
    if _fmt(args, "json") == "csv":
        rows = [[format_rational(s.piece[0]), format_rational(s.piece[1]), s.delta,
                 " ".join(str(i) for i in s.s_plus)] for s in report.segments]
        return _csv(["t_start", "t_end", "delta", "S_plus"], rows)
    return _json(report.to_dict())


def cmd_template_from_trace(args) -> str:
    dims = Dims(args.m, args.n)
    trace = MinimaTrace.from_csv(_read(args.trace), dims)
    path = path_from_samples(dims, trace.times, trace.log_minima)
    return dumps_template(path, {"builder": "trace", "source": args.trace})


def cmd_simulate(args) -> str:
    if args.dt <= 0:
        raise UsageError("--dt must be positive")
    if args.t_max < 0:
        raise UsageError("--t-max must be nonnegative")
    x = _lattice(args)
    trace = log_minima_trace(x, time_grid(args.t_max, args.dt), args.budget, args.workers)
    if _fmt(args, "csv") == "json":
        return _json({"m": x.dims.m, "n": x.dims.n, "t": [float(t) for t in trace.times],
                      "lambda": trace.minima.tolist(), "log_lambda": trace.log_minima.tolist()})
    return trace.to_csv()


def cmd_compare(args) -> str:
    f = _load_template(args.template)
    trace = MinimaTrace.from_csv(_read(args.trace), f.dims)
    doc = compare_trace_to_template(trace, f, args.window).to_dict()
    if _fmt(args, "json") == "csv":
        return _csv(["t_start", "t_end", "sup"],
                    [[w["t_start"], w["t_end"], w["sup"]] for w in doc["window_sups"]])
    return _json(doc)


def cmd_occupation(args) -> str:
    if args.dt <= 0 or args.T <= 0:
        raise UsageError("--T and --dt must be positive")
    x = _lattice(args)
    prof = occupation_fraction(x, args.T, args.M, args.dt, args.budget, args.workers)
    doc = prof.to_dict()
    if _fmt(args, "json") == "csv":
        return _csv(list(doc), [list(doc.values())])
    return _json(doc)


def cmd_probe(args) -> str:
    if args.q_max < 1:
        raise UsageError("--q-max must be >= 1")
    if (args.theta is None) == (args.cf is None):
        raise UsageError("give exactly one of --theta and --cf")
    if args.cf is not None:
        try:
            quotients = [int(a) for a in args.cf.split(",") if a.strip()]
        except ValueError as exc:
            raise UsageError("--cf expects comma-separated positive integers") from exc
        if not quotients or min(quotients) < 1:
            raise UsageError("--cf expects comma-separated positive integers")
        theta = [theta_from_partial_quotients(quotients, dps=args.dps or 60)]
    else:
        theta = [_number(v, args.dps) for v in args.theta]
    probe = singularity_probe(theta, args.q_max, args.num)
    if _fmt(args, "json") == "csv":
        return _csv(["Q", "S"], [[int(q), format(float(s), ".17g")] for q, s in zip(probe.Q, probe.S)])
    return _json(probe.to_dict())


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized inputs")

    parser = argparse.ArgumentParser(prog="pgn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    tpl = sub.add_parser("template", help="build, validate, score templates")
    tsub = tpl.add_subparsers(dest="action", required=True)

    p = tsub.add_parser("build", parents=[common], help="explicit k-divergent linked template")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=0, help="0 is the 1-divergent family")
    p.add_argument("--horizon", required=True, help="domain end T (integer or p/q)")
    p.add_argument("--emit-csv", metavar="FILE", help="also write breakpoints as CSV")
    p.set_defaults(func=cmd_template_build)

    p = tsub.add_parser("validate", parents=[common], help="check the template axioms")
    p.add_argument("template")
    p.set_defaults(func=cmd_template_validate)

    for target in (tsub, sub):
        p = target.add_parser("score", parents=[common], help="exact score report")
        p.add_argument("template")
        p.add_argument("--T", help="horizon of the average (default: whole domain)")
        p.set_defaults(func=cmd_score)

    p = tsub.add_parser("from-trace", parents=[common], help="interpolate a trace CSV as a path")
    p.add_argument("trace")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_template_from_trace)

    p = sub.add_parser("simulate", parents=[common], help="log-minima trace under the flow")
    _add_lattice_args(p)
    p.add_argument("--t-max", type=float, default=DEFAULT_HORIZON)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="trace vs template distance")
    p.add_argument("trace")
    p.add_argument("template")
    p.add_argument("--window", type=float, default=5.0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("occupation", parents=[common], help="time fraction with log lambda_1 >= M")
    _add_lattice_args(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.set_defaults(func=cmd_occupation)

    p = sub.add_parser("probe-singular", parents=[common], help="Dirichlet improvability samples")
    p.add_argument("--theta", nargs="+", metavar="V")
    p.add_argument("--cf", metavar="A1,A2,...")
    p.add_argument("--q-max", type=int, required=True)
    p.add_argument("--num", type=int, default=40, help="grid size (0 for every Q)")
    p.add_argument("--dps", type=int)
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "num", None) == 0:
        args.num = None
    try:
        result = args.func(args)
        text, code = result if isinstance(result, tuple) else (result, EXIT_OK)
        _emit(text, args.out)
        return code
    except (UsageError, PGNError) as exc:
        if isinstance(exc, InvariantError):
            print(f"pgn: internal error: {exc}", file=sys.stderr)
            return EXIT_INTERNAL
        print(f"pgn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - last-resort report
        print(f"pgn: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
