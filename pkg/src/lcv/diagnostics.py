"""Recession-direction diagnostics for polyhedral constraint cones.

All three checks look for a direction d in R^n with ``Hd`` in the recession
cone of K (plus extra conditions), normalized to the unit infinity ball so
each search is a small bounded LP:

* shift-set closedness: no nonzero d with Hd in rec K;
* level boundedness: no nonzero d with c'd <= 0, Gd = 0, Hd in rec K;
* unboundedness of P(s): some d with c'd < 0, Gd = 0, Hd in rec K.

The first two are sufficient conditions only, so a found direction yields
``Inconclusive`` rather than a negative verdict.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .cones import recession_kinds
from .errors import UnsupportedDiagnostic
from .model import Certificate, CertificateKind, QpProblem

ZERO_TOL = 1e-8
FEAS_TOL = 1e-7


def _recession_rows(problem: QpProblem, with_objective: bool):
    if not problem.cone.is_polyhedral:
        bad = [b.name for b in problem.cone if b.kind not in (0, 1, 2)]
        raise UnsupportedDiagnostic(f"recession diagnostics cover polyhedral blocks only, got {bad}")
    up, lo = recession_kinds(problem.cone)
    H = problem.H
    eq_mask = up & lo
    A_eq = [H[eq_mask]]
    A_ub = [H[up & ~lo], -H[lo & ~up]]
    if with_objective:
        A_eq.append(problem.G)
    A_eq = np.vstack(A_eq)
    A_ub = np.vstack(A_ub)
    return A_eq, A_ub


def _max_coordinate(A_eq, A_ub, extra_ub=None):
    """Largest |d_j| over {d in [-1,1]^n : A_eq d = 0, A_ub d <= 0}."""
    n = A_eq.shape[1] if A_eq.size else A_ub.shape[1]
    if extra_ub is not None:
        A_ub = np.vstack([A_ub, extra_ub])
    kw = dict(
        A_ub=A_ub if A_ub.shape[0] else None, b_ub=np.zeros(A_ub.shape[0]) if A_ub.shape[0] else None,
        A_eq=A_eq if A_eq.shape[0] else None, b_eq=np.zeros(A_eq.shape[0]) if A_eq.shape[0] else None,
        bounds=[(-1.0, 1.0)] * n, method="highs")
    best, best_d = 0.0, None
    for j in range(n):
        for sign in (1.0, -1.0):
            obj = np.zeros(n)
            obj[j] = -sign
            res = linprog(obj, **kw)
            if res.status == 0 and -res.fun > best:
                best, best_d = -res.fun, res.x
    return best, best_d


def _witness_ok(A_eq, A_ub, d, tol=ZERO_TOL):
    return (np.abs(A_eq @ d).max(initial=0.0) <= tol and (A_ub @ d).max(initial=0.0) <= tol)


def _clean(d):
    d = np.where(np.abs(d) < 1e-12, 0.0, d)
    return d / np.abs(d).max()


def check_shift_set_closed(problem: QpProblem) -> Certificate:
    A_eq, A_ub = _recession_rows(problem, with_objective=False)
    size, d = _max_coordinate(A_eq, A_ub)
    if size <= ZERO_TOL:
        return Certificate(CertificateKind.SHIFT_SET_CLOSED,
                           detail="only d = 0 has Hd in the recession cone of K")
    d = _clean(d)
    return Certificate(CertificateKind.INCONCLUSIVE, d,
                       detail="nonzero recession direction of the constraint set; "
                              "closedness not certified")


def check_level_bounded(problem: QpProblem) -> Certificate:
    A_eq, A_ub = _recession_rows(problem, with_objective=True)
    cost = problem.c.reshape(1, -1)
    size, d = _max_coordinate(A_eq, A_ub, extra_ub=cost)
    if size <= ZERO_TOL:
        return Certificate(CertificateKind.LEVEL_BOUNDED,
                           detail="no nonzero d with c'd <= 0, Gd = 0, Hd in rec K")
    d = _clean(d)
    return Certificate(CertificateKind.INCONCLUSIVE, d,
                       detail="nonzero direction of recession for the objective on the feasible set")


def check_unbounded_below(problem: QpProblem, s=None) -> Certificate:
    """Search for d with c'd < 0, Gd = 0, Hd in rec K.

    The recession cone does not depend on the shift, so ``s`` only enters
    through the requirement that P(s) be feasible; an infeasible P(s) is
    reported as inconclusive.
    """
    if s is not None:
        from .oracle import least_shift

        resid = least_shift(problem.shifted(s)).norm
        if resid > FEAS_TOL:
            return Certificate(CertificateKind.INCONCLUSIVE,
                               detail=f"P(s) is infeasible (residual shift {resid:.3e})")
    A_eq, A_ub = _recession_rows(problem, with_objective=True)
    n = problem.n
    res = linprog(problem.c, A_ub=A_ub if A_ub.shape[0] else None,
                  b_ub=np.zeros(A_ub.shape[0]) if A_ub.shape[0] else None,
                  A_eq=A_eq if A_eq.shape[0] else None,
                  b_eq=np.zeros(A_eq.shape[0]) if A_eq.shape[0] else None,
                  bounds=[(-1.0, 1.0)] * n, method="highs")
    if res.status == 0 and res.fun < -ZERO_TOL:
        d = _clean(res.x)
        if problem.c @ d < 0 and _witness_ok(A_eq, A_ub, d):
            return Certificate(CertificateKind.UNBOUNDED_BELOW, d,
                               detail=f"c'd = {problem.c @ d:.6g} along a recession direction")
    return Certificate(CertificateKind.INCONCLUSIVE,
                       detail="no descent recession direction found")
