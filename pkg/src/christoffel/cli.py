"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 invariant violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import errors
from .constructions.boxmaps import corner_map_3d, parallelogram_2d
from .constructions.needles import bound_rhs, needle_certificate
from .harness.experiments import REGISTRY, run_experiment
from .harness.presets import PRESETS, parse_body
from .harness.report import FORMATS, _plain, emit
from .kernel import christoffel_eval
from .geometry.measure import measure
from .quadrature import dump_moments, set_default_seed

INVARIANT = (errors.ContainmentFailed, errors.RoundTripFailed, errors.SigmaViolated)
USAGE = (errors.UnknownExperiment, errors.ParamOutOfRange, errors.ParameterOutOfRange, errors.XOnBoundary,
         errors.DegreeTooLarge, ValueError)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _vector(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def build_parser() -> Parser:
    p = Parser(prog="christoffel", description="Christoffel functions of convex bodies.")
    common = Parser(add_help=False)
    common.add_argument("--body", help=f"preset ({', '.join(PRESETS)}) or JSON file")
    common.add_argument("--body-file", help="JSON body description")
    common.add_argument("--point", type=_vector, help="comma separated coordinates")
    common.add_argument("--dir", type=_vector, help="direction u (default: towards the nearest boundary point)")
    common.add_argument("--n", type=int, help="polynomial degree")
    common.add_argument("--precision", choices=("double", "extended"), default="double")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--format", default=None, help="json or csv for single evaluations")
    common.add_argument("--dump-moments", metavar="PATH", help="write the monomial moments up to degree 2n")
    common.add_argument("--sigma", type=float, default=1.0, help="lower limit of delta n^2 for the bound")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [("eval", "lambda_n(D, x)"), ("measure", "exit distance, chords and section"),
                       ("bound", "bound right-hand side next to lambda_n"), ("certify", "needle certificate")]:
        sub.add_parser(name, parents=[common], help=text)
    ex = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    ex.add_argument("name", help=", ".join(sorted(REGISTRY)))
    ex.add_argument("--param", action="append", default=[], metavar="K=V")
    ex.add_argument("--out", default=".", help="output directory")
    return p


def _body_and_point(args, need_point=True):
    src = args.body_file or args.body
    if not src:
        raise UsageError("--body or --body-file is required")
    body, suggested = parse_body(src)
    x = args.point if args.point is not None else suggested
    if need_point and x is None:
        raise UsageError("--point is required for this body")
    if x is not None and len(x) != body.dim:
        raise UsageError(f"point has {len(x)} coordinates, body has dimension {body.dim}")
    return body, x


def _need_n(args):
    if args.n is None:
        raise UsageError("--n is required")
    return args.n


def _write(row: dict, fmt):
    row = _plain(row)
    if fmt == "csv":
        flat = {k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()}
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(flat))
        w.writeheader()
        w.writerow(flat)
        sys.stdout.write(buf.getvalue())
    else:
        print(json.dumps(row, indent=2))


def _run(args) -> int:
    if args.seed is not None:
        set_default_seed(args.seed)
    fmt = args.format or ("csv,json,svg" if args.command == "experiment" else "json")
    if args.command == "experiment":
        params = {}
        for kv in args.param:
            k, sep, v = kv.partition("=")
            if not sep:
                raise UsageError(f"--param expects K=V, got {kv!r}")
            params[k] = v
        report = run_experiment(args.name, params)
        for f in fmt.split(","):
            if f not in FORMATS:
                raise UsageError(f"unknown format {f!r}")
            for path in emit(report, f, args.out):
                print(path)
        print(json.dumps(_plain(report.summary)), file=sys.stderr)
        return 2 if report.summary.get("violations", 0) else 0
    if fmt not in ("json", "csv"):
        raise UsageError("single evaluations are written as json or csv")
    body, x = _body_and_point(args)
    if args.dump_moments:
        dump_moments(body, 2 * _need_n(args), args.dump_moments)
    if args.command == "eval":
        _write(christoffel_eval(body, _need_n(args), x, args.precision).to_dict(), fmt)
    elif args.command == "measure":
        _write(measure(body, x, args.dir).to_dict(), fmt)
    elif args.command == "bound":
        n = _need_n(args)
        meas = measure(body, x, args.dir)
        lam = christoffel_eval(body, n, x, args.precision)
        rhs = bound_rhs(meas, n, body.dim, args.sigma)
        _write({"n": n, "x": x, "lambda": lam.value, "bound_rhs": rhs, "ratio": lam.value / rhs,
                "measurement": meas.to_dict()}, fmt)
    elif args.command == "certify":
        n = _need_n(args)
        meas = measure(body, x, args.dir)
        if body.dim == 2:
            bm = parallelogram_2d(body, x, meas.u)
        elif body.dim == 3:
            bm = corner_map_3d(body, x, meas.u)
        else:
            raise UsageError("certificates are built in dimensions 2 and 3")
        cert = needle_certificate(body, n, bm)
        lam = christoffel_eval(body, n, x, args.precision).value
        out = cert.to_dict()
        out.update(n=n, x=x, **{"lambda": lam, "box": bm.to_dict()})
        _write(out, fmt)
        if lam > cert.l2sq.value + 1e-9 or cert.l2sq.value > cert.bound + 1e-9:
            return 2
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        return _run(parser.parse_args(argv))
    except UsageError as exc:
        print(f"christoffel: {exc}", file=sys.stderr)
        return 1
    except INVARIANT as exc:
        print(f"christoffel: invariant violated: {exc}", file=sys.stderr)
        return 2
    except USAGE as exc:
        print(f"christoffel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (errors.ChristoffelError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"christoffel: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
