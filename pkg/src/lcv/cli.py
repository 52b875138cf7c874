"""``lcv`` command line front end.

Exit codes: 0 success, 2 non-convergence (or a failed verification),
3 input error. Errors are also written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import alm, diagnostics, instances, io, oracle
from .errors import LcvError, NonConvergence, UnsupportedDiagnostic, ValidationError

EXIT_OK, EXIT_NONCONVERGED, EXIT_INPUT = 0, 2, 3
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class InputError(Exception):
    """Bad command line or unreadable input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not np.isfinite(v) or v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return v


def _solver_flags(p):
    p.add_argument("--r0", type=_float, default=1.0)
    p.add_argument("--r-growth", type=_float, default=1.0)
    p.add_argument("--r-max", type=_float, default=1e6)
    p.add_argument("--tol", type=_float, default=1e-8)
    p.add_argument("--max-outer", type=_int, default=1000)
    p.add_argument("--inner-tol", type=_float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lcv", description="Least constraint-violation augmented Lagrangian solver")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the augmented Lagrangian method")
    p.add_argument("input", nargs="?", help="problem JSON file")
    _solver_flags(p)
    p.add_argument("--trace", help="write the per-iteration trace CSV here")
    p.add_argument("--lambda0", help="JSON file with the initial multiplier")
    p.add_argument("--seed", type=_int, default=0, help="accepted for uniformity; solve is deterministic")
    p.add_argument("--batch", help="solve every *.json in this directory")
    p.add_argument("--workers", type=_int, default=None)

    p = sub.add_parser("shift", help="least-violation shift by the independent oracle")
    p.add_argument("input")
    p.add_argument("--tol", type=_float, default=1e-13)
    p.add_argument("--seed", type=_int, default=0)

    p = sub.add_parser("diagnose", help="recession-cone certificates")
    p.add_argument("input")

    p = sub.add_parser("gen", help="write a seeded instance")
    p.add_argument("family", choices=instances.FAMILIES)
    p.add_argument("--n", type=_int, required=True)
    p.add_argument("--m", type=_int, required=True)
    p.add_argument("--seed", type=_int, required=True)
    p.add_argument("-o", "--out", help="output path (stdout if omitted)")

    p = sub.add_parser("verify", help="check a solve report against the problem and the oracle")
    p.add_argument("input")
    p.add_argument("report")
    p.add_argument("--tol", type=_float, default=1e-6)
    p.add_argument("--shift-tol", type=_float, default=1e-5)
    return ap


def _config(args) -> alm.AlmConfig:
    try:
        return alm.AlmConfig(r0=args.r0, r_growth=args.r_growth, r_max=args.r_max, tol=args.tol,
                             max_outer=args.max_outer, inner_tol=args.inner_tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def _load(path):
    try:
        return io.parse_problem(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _lambda0(path):
    if path is None:
        return None
    d = _read_json(path)
    if isinstance(d, dict):
        d = d.get("lambda")
    try:
        return np.array(d, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: expected a list of numbers or an object with 'lambda'") from exc


def _solve_one(problem, config, lam0=None):
    try:
        return alm.solve(problem, config, lam0)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _exit_for(report) -> int:
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_solve(args, out) -> int:
    config = _config(args)
    if args.batch:
        if args.input or args.trace or args.lambda0:
            raise InputError("--batch takes no input file, --trace or --lambda0")
        return _batch(Path(args.batch), config, args.workers, out)
    if not args.input:
        raise InputError("solve needs an input file or --batch DIR")
    problem = _load(args.input)
    report = _solve_one(problem, config, _lambda0(args.lambda0))
    if args.trace:
        alm.write_trace_csv(report.trace, args.trace)
    out.write(io.dumps(io.report_to_dict(report, problem)) + "\n")
    return _exit_for(report)


def _batch(folder: Path, config, workers, out) -> int:
    if not folder.is_dir():
        raise InputError(f"not a directory: {folder}")
    files = sorted(folder.glob("*.json"))

    def run(path):
        try:
            problem = io.parse_problem(path)
            report = alm.solve(problem, config)
        except (ValidationError, ValueError) as exc:
            return {"file": path.name, "error": type(exc).__name__, "message": str(exc)}, EXIT_INPUT
        except NonConvergence as exc:
            return ({"file": path.name, "error": type(exc).__name__, "message": str(exc)},
                    EXIT_NONCONVERGED)
        return {"file": path.name, "report": io.report_to_dict(report, problem)}, _exit_for(report)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, files))
    out.write(io.dumps([r for r, _ in results]) + "\n")
    return max((code for _, code in results), default=EXIT_OK)


def cmd_shift(args, out) -> int:
    res = oracle.least_shift(_load(args.input), tol=args.tol, seed=args.seed)
    out.write(io.dumps(res.to_dict()) + "\n")
    return EXIT_OK


def cmd_diagnose(args, out) -> int:
    problem = _load(args.input)
    result = {}
    for name, fn in (("shift_set_closed", diagnostics.check_shift_set_closed),
                     ("level_bounded", diagnostics.check_level_bounded),
                     ("unbounded_below", diagnostics.check_unbounded_below)):
        try:
            result[name] = fn(problem).to_dict()
        except UnsupportedDiagnostic as exc:
            result[name] = {"kind": "Unsupported", "direction": None, "detail": str(exc)}
    out.write(io.dumps(result) + "\n")
    return EXIT_OK


def cmd_gen(args, out) -> int:
    try:
        problem = instances.generate(args.family, args.n, args.m, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    text = io.dumps(io.problem_to_dict(problem)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    problem = _load(args.input)
    rep = _read_json(args.report)
    try:
        x, y = np.array(rep["x"], float), np.array(rep["y"], float)
        lam = np.array(rep["lambda_prev"] if rep.get("lambda_prev") is not None else rep["lambda"],
                       float)
        r = float(rep["r"])
        s = np.array(rep["shift"]["s"], float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.report}: not a solve report ({exc})") from exc
    if x.shape != (problem.n,) or y.shape != (problem.m,) or lam.shape != (problem.m,):
        raise InputError(f"{args.report}: dimensions do not match {args.input}")
    residuals = alm.optimality_residuals(problem, x, y, lam, r)
    certified = all(v <= args.tol for v in residuals.values())
    ref = oracle.least_shift(problem)
    gap = float(np.linalg.norm(s - ref.s))
    result = {"certificate": certified, "residuals": residuals,
              "oracle_shift": ref.s.tolist(), "shift_gap": gap}
    ok = certified and gap <= args.shift_tol
    if ref.norm <= 1e-8:
        nu = oracle.eval_nu(problem)
        if nu.argmin is not None:
            result["oracle_x_gap"] = float(np.linalg.norm(x - nu.argmin))
            ok = ok and result["oracle_x_gap"] <= args.shift_tol
    result["ok"] = ok
    out.write(io.dumps(result) + "\n")
    return EXIT_OK if ok else EXIT_NONCONVERGED


COMMANDS = {"solve": cmd_solve, "shift": cmd_shift, "diagnose": cmd_diagnose,
            "gen": cmd_gen, "verify": cmd_verify}


def _setup_logging():
    level = os.environ.get("LCV_LOG", "error").strip().lower()
    if level not in LOG_LEVELS:
        raise InputError(f"LCV_LOG must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=LOG_LEVELS[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def _fail(err, code, exc) -> int:
    err.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "exit_code": code}) + "\n")
    return code


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        _setup_logging()
        args = build_parser().parse_args(argv)
        return COMMANDS[args.verb](args, out)
    except (InputError, ValidationError) as exc:
        return _fail(err, EXIT_INPUT, exc)
    except NonConvergence as exc:
        return _fail(err, EXIT_NONCONVERGED, exc)
    except LcvError as exc:
        return _fail(err, EXIT_NONCONVERGED, exc)


if __name__ == "__main__":
    sys.exit(main())
