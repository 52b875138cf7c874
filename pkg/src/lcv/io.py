"""Problem files and report serialization.

Problem schema (JSON)::

    {"n": 2,
     "G": [[...], ...] | {"rows": [...], "cols": [...], "vals": [...], "shape": [r, c]},
     "c": [...],
     "H": dense | COO,
     "h": [...],
     "cones": [{"zero": q}, {"nonpos": p}, {"box": {"l": [...], "u": [...]}}, {"soc": d}]}

Floats are written with ``repr``, which round-trips binary64 exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cones import ConeError, ConeSpec, block_from_record, block_to_record
from .errors import DimensionMismatch, ParseError
from .model import QpProblem, validate

DENSE_LIMIT = 64
REQUIRED = ("n", "G", "c", "H", "h", "cones")


def _matrix(field, val):
    if isinstance(val, dict):
        try:
            rows, cols, vals = val["rows"], val["cols"], val["vals"]
            r, c = (int(v) for v in val["shape"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"field {field!r}: COO needs rows, cols, vals and shape") from exc
        if not len(rows) == len(cols) == len(vals):
            raise ParseError(f"field {field!r}: COO arrays differ in length")
        out = np.zeros((r, c))
        for i, j, v in zip(rows, cols, vals):
            if not (isinstance(i, int) and isinstance(j, int)) or not (0 <= i < r and 0 <= j < c):
                raise ParseError(f"field {field!r}: COO index ({i}, {j}) outside shape {(r, c)}")
            out[i, j] += float(v)
        return out
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {field!r}: not a numeric matrix") from exc
    if arr.ndim != 2:
        raise ParseError(f"field {field!r}: dense matrix must be a list of rows")
    return arr


def _vector(field, val):
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {field!r}: not a numeric vector") from exc
    if arr.ndim != 1:
        raise ParseError(f"field {field!r}: expected a flat list")
    return arr


def problem_from_dict(d: dict) -> QpProblem:
    if not isinstance(d, dict):
        raise ParseError("problem file must hold a JSON object")
    missing = [k for k in REQUIRED if k not in d]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")
    unknown = sorted(set(d) - set(REQUIRED))
    if unknown:
        raise ParseError(f"unknown field(s): {', '.join(unknown)}")
    if not isinstance(d["cones"], list):
        raise ParseError("field 'cones': expected a list of cone records")
    try:
        cone = ConeSpec([block_from_record(r) for r in d["cones"]])
    except ConeError as exc:
        raise ParseError(f"field 'cones': {exc}") from exc
    p = QpProblem(_matrix("G", d["G"]), _vector("c", d["c"]), _matrix("H", d["H"]),
                  _vector("h", d["h"]), cone)
    if d["n"] != p.n:
        raise DimensionMismatch(f"n = {d['n']} but c has length {p.n}")
    validate(p)
    return p


def _encode_matrix(A):
    A = np.asarray(A, dtype=float)
    if max(A.shape) <= DENSE_LIMIT:
        return A.tolist()
    r, c = np.nonzero(A)
    return {"rows": r.tolist(), "cols": c.tolist(), "vals": A[r, c].tolist(),
            "shape": list(A.shape)}


def problem_to_dict(p: QpProblem) -> dict:
    return {"n": p.n, "G": _encode_matrix(p.G), "c": p.c.tolist(), "H": _encode_matrix(p.H),
            "h": p.h.tolist(), "cones": [block_to_record(b) for b in p.cone]}


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False, default=_default)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def parse_problem(path) -> QpProblem:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return problem_from_dict(d)


def write_problem(p: QpProblem, path) -> None:
    Path(path).write_text(dumps(problem_to_dict(p)) + "\n")


def _finite(v):
    v = float(v)
    return v if np.isfinite(v) else repr(v)


def report_to_dict(report, problem: QpProblem) -> dict:
    """Solve report as plain JSON; wall time is left out so output is reproducible."""
    st = report.state
    return {
        "status": report.status,
        "iterations": st.k,
        "shift": {"s": st.s.tolist(), "norm": st.shift_norm},
        "x": st.x.tolist(),
        "y": st.y.tolist(),
        "lambda": st.lam.tolist(),
        "lambda_prev": None if st.lam_prev is None else st.lam_prev.tolist(),
        "r": st.r,
        "objective": _finite(problem.objective(st.x)),
        "residuals": {"opt": st.opt_residual, "proj": st.proj_residual},
        "message": report.message,
    }
