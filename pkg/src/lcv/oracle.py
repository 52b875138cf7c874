"""Ground-truth computations that share no iteration with the ALM path.

* ``least_shift``: the least-violation shift from

      min_{x, y in K} 1/2 ||g(x) - y||^2

  by accelerated projected alternating minimization (least-squares x-step
  through an SVD range basis of H, projection y-step, Nesterov momentum on y
  with gradient restarts).
* ``eval_nu``: the optimal value of the shifted problem by a primal-dual
  hybrid gradient method, polished on the active set for polyhedral K.
* ``eval_theta`` / ``theta_batch``: the dual function in closed form.
* Grid-based checks of conjugacy, Moreau envelopes and dual recession.

Only cone projections and support functions are shared with the solver.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import lsq_linear

from .cones import BOX, NONPOS, SOC, ZERO, project, support_function
from .diagnostics import check_unbounded_below
from .errors import LcvError, NonConvergence
from .model import CertificateKind, QpProblem, ShiftVector

log = logging.getLogger(__name__)

RANGE_TOL = 1e-10


class GridTooCoarse(UserWarning):
    """Grid spacing dominates the requested tolerance."""


@dataclass(frozen=True)
class ShiftResult(ShiftVector):
    x: np.ndarray = None
    y: np.ndarray = None
    iterations: int = 0
    adjoint_residual: float = 0.0
    projection_residual: float = 0.0
    source: str = "oracle.least_shift"

    def to_dict(self) -> dict:
        return {"s": self.s.tolist(), "norm": self.norm, "x": self.x.tolist(),
                "y": self.y.tolist(), "adjoint_residual": self.adjoint_residual,
                "projection_residual": self.projection_residual,
                "iterations": self.iterations, "source": self.source}


@dataclass
class NuValue:
    s: np.ndarray
    nu: float
    argmin: np.ndarray | None = None
    certificate: np.ndarray | None = None


@dataclass
class DualValue:
    lam: np.ndarray
    theta: float
    minimizer_x: np.ndarray | None = None


def _range_basis(H):
    U, sv, _ = np.linalg.svd(H, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return U[:, :0]
    return U[:, sv > RANGE_TOL * sv[0]]


def _fista_shift(K, Q, h, y, tol, max_iter):
    def resid(v):
        w = v + h
        return w - Q @ (Q.T @ w)

    z = y.copy()
    t = 1.0
    for it in range(1, max_iter + 1):
        ynew = project(K, z - resid(z))
        if (z - ynew) @ (ynew - y) > 0:
            t = 1.0
        tnew = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = ynew + ((t - 1.0) / tnew) * (ynew - y)
        step = float(np.abs(ynew - y).max(initial=0.0))
        y, t = ynew, tnew
        if step <= tol:
            return y, it, step
    return y, max_iter, step


def least_shift(problem: QpProblem, tol: float = 1e-13, max_iter: int = 200_000,
                restarts: int = 1, seed: int = 0) -> ShiftResult:
    """Smallest-norm shift s making g(x) + s in K feasible.

    Runs from Pi_K(-h) and from ``restarts`` random starts; the shift is
    unique, so the best run is kept and disagreement is logged.
    """
    H, h, K = problem.H, problem.h, problem.cone
    Q = _range_basis(H)
    rng = np.random.default_rng(seed)
    starts = [project(K, -h)]
    scale = 1.0 + float(np.abs(h).max(initial=0.0))
    starts += [project(K, scale * rng.standard_normal(problem.m)) for _ in range(restarts)]
    runs = []
    for y0 in starts:
        y, it, step = _fista_shift(K, Q, h, y0, tol, max_iter)
        w = y + h
        s = w - Q @ (Q.T @ w)
        runs.append((float(s @ s), s, y, it, step))
    runs.sort(key=lambda r: r[0])
    _, s, y, it, step = runs[0]
    if step > tol and step > 1e3 * tol:
        raise NonConvergence(f"least_shift stalled at step {step:.3e}", best=s)
    spread = max(np.abs(r[1] - s).max(initial=0.0) for r in runs)
    if spread > 1e-6:
        log.warning("least_shift restarts disagree by %.3e", spread)
    x = np.linalg.lstsq(H, y + h, rcond=None)[0]
    g = H @ x - h
    return ShiftResult(s=y - g, x=x, y=y, iterations=sum(r[3] for r in runs),
                       adjoint_residual=float(np.abs(H.T @ (g - y)).max(initial=0.0)),
                       projection_residual=float(np.abs(project(K, g) - y).max(initial=0.0)))


def _pdhg(problem: QpProblem, tol, max_iter):
    """Chambolle-Pock on min f(x) + indicator_K(Hx - h)."""
    G, c, H, h, K = problem.G, problem.c, problem.H, problem.h, problem.cone
    n, m = problem.n, problem.m
    nrm = np.linalg.norm(H, 2)
    tau = sigma = 0.9 / nrm if nrm > 0 else 1.0
    cf = cho_factor(np.eye(n) + tau * G)
    x = np.zeros(n)
    z = np.zeros(m)
    for it in range(1, max_iter + 1):
        xn = cho_solve(cf, x - tau * (c + H.T @ z))
        v = z + sigma * (H @ (2.0 * xn - x))
        zn = v - sigma * (project(K, v / sigma - h) + h)
        diff = max(np.abs(xn - x).max(initial=0.0), np.abs(zn - z).max(initial=0.0))
        x, z = xn, zn
        if not np.isfinite(diff) or np.abs(x).max() > 1e12:
            return x, z, it, False
        if diff <= tol:
            return x, z, it, True
    return x, z, max_iter, False


def _polish(problem: QpProblem, x, act_tol=1e-7):
    """Solve the equality-constrained QP on the active rows of a polyhedral K."""
    K = problem.cone
    if not K.is_polyhedral:
        return None
    w = problem.H @ x - problem.h
    rows, rhs, signs = [], [], []
    for b, sl in K.slices():
        idx = np.arange(sl.start, sl.stop)
        if b.kind == ZERO:
            for i in idx:
                rows.append(i); rhs.append(0.0); signs.append(0)
        elif b.kind == NONPOS:
            for i in idx[w[idx] >= -act_tol]:
                rows.append(i); rhs.append(0.0); signs.append(1)
        else:
            for i in idx:
                if np.isfinite(K.upper[i]) and w[i] >= K.upper[i] - act_tol:
                    rows.append(i); rhs.append(K.upper[i]); signs.append(1)
                elif np.isfinite(K.lower[i]) and w[i] <= K.lower[i] + act_tol:
                    rows.append(i); rhs.append(K.lower[i]); signs.append(-1)
    n = problem.n
    A = problem.H[rows]
    bvec = np.asarray(rhs) + problem.h[rows]
    kkt = np.block([[problem.G, A.T], [A, np.zeros((len(rows), len(rows)))]])
    sol = np.linalg.lstsq(kkt, np.concatenate([-problem.c, bvec]), rcond=None)[0]
    xp = sol[:n]
    viol = project(K, problem.H @ xp - problem.h) - (problem.H @ xp - problem.h)
    scale = 1.0 + np.abs(problem.h).max(initial=0.0)
    if np.abs(viol).max(initial=0.0) > 1e-11 * scale:
        return None
    # degenerate active sets have many multipliers; look for a sign-correct one
    sgn = np.asarray(signs)
    lb = np.where(sgn > 0, 0.0, -np.inf)
    ub = np.where(sgn < 0, 0.0, np.inf)
    grad = problem.G @ xp + problem.c
    if len(rows):
        fit = lsq_linear(A.T, -grad, bounds=(lb, ub), method="bvls")
        grad = grad + A.T @ fit.x
    if np.abs(grad).max(initial=0.0) > 1e-9 * scale:
        return None
    return xp


def eval_nu(problem: QpProblem, s=None, tol: float = 1e-11, feas_tol: float = 1e-7,
            max_iter: int = 500_000) -> NuValue:
    """nu(s) = inf { f(x) : g(x) + s in K }, +inf outside the shift set."""
    s = np.zeros(problem.m) if s is None else np.asarray(s, dtype=float)
    shifted = problem.shifted(s)
    ls = least_shift(shifted)
    if ls.norm > feas_tol:
        return NuValue(s, np.inf, None, certificate=ls.s)
    if problem.cone.is_polyhedral:
        # P(s) is feasible, so it is unbounded iff a descent recession direction exists
        cert = check_unbounded_below(shifted)
        if cert.kind is CertificateKind.UNBOUNDED_BELOW:
            return NuValue(s, -np.inf, None, certificate=cert.direction)
    x, _, it, ok = _pdhg(shifted, tol, max_iter)
    if not ok:
        if np.abs(x).max() > 1e12 or not np.isfinite(x).all():
            return NuValue(s, -np.inf, None)
        raise NonConvergence(f"eval_nu: PDHG did not reach {tol:g} in {it} iterations",
                             best=x)
    xp = _polish(shifted, x)
    if xp is not None and shifted.objective(xp) <= shifted.objective(x) + 1e-9 * (
            1.0 + abs(shifted.objective(x))):
        x = xp
    return NuValue(s, problem.objective(x), x)


def eval_theta(problem: QpProblem, lam) -> DualValue:
    """theta(lam) = support_K(lam) - inf_x [f(x) + <lam, g(x)>]."""
    lam = np.asarray(lam, dtype=float)
    sup = support_function(problem.cone, lam)
    if np.isinf(sup):
        return DualValue(lam, np.inf)
    q = problem.c + problem.H.T @ lam
    x = np.linalg.lstsq(problem.G, -q, rcond=None)[0]
    if np.linalg.norm(problem.G @ x + q) > RANGE_TOL * (1.0 + np.linalg.norm(q)):
        return DualValue(lam, np.inf)
    inf_val = 0.5 * x @ problem.G @ x + q @ x - lam @ problem.h
    return DualValue(lam, float(sup - inf_val), x)


class _ThetaBatch:
    """Vectorized dual function for grid work (rows of ``lams`` are points)."""

    def __init__(self, problem: QpProblem):
        self.p = problem
        w, V = np.linalg.eigh(problem.G)
        big = w > RANGE_TOL * max(1.0, w.max(initial=0.0))
        self.Vr, self.wr = V[:, big], w[big]
        self.N = V[:, ~big]

    def __call__(self, lams):
        p = self.p
        lams = np.atleast_2d(np.asarray(lams, dtype=float))
        q = p.c[None, :] + lams @ p.H
        coeff = q @ self.Vr
        quad = 0.5 * np.sum(coeff ** 2 / self.wr, axis=1)
        out = quad + lams @ p.h + _support_rows(p.cone, lams)
        if self.N.shape[1]:
            off = np.linalg.norm(q @ self.N, axis=1)
            out[off > RANGE_TOL * (1.0 + np.linalg.norm(q, axis=1))] = np.inf
        return out


def _support_rows(K, lams):
    out = np.zeros(lams.shape[0])
    for b, sl in K.slices():
        v = lams[:, sl]
        if b.kind == NONPOS:
            out[(v < 0).any(axis=1)] = np.inf
        elif b.kind == BOX:
            with np.errstate(invalid="ignore"):
                up = np.where(v > 0, v * np.where(np.isinf(b.upper), np.inf, b.upper), 0.0)
                lo = np.where(v < 0, v * np.where(np.isinf(b.lower), -np.inf, b.lower), 0.0)
            out = out + up.sum(axis=1) + lo.sum(axis=1)
        elif b.kind == SOC:
            bad = np.linalg.norm(v[:, 1:], axis=1) > -v[:, 0]
            out[bad] = np.inf
    return out


def theta_batch(problem: QpProblem, lams) -> np.ndarray:
    return _ThetaBatch(problem)(lams)


def theta_shifted(problem: QpProblem, lam, s) -> float:
    """theta_s(lam) = theta(lam) - <s, lam>, the dual function of P(s)."""
    return eval_theta(problem, lam).theta - float(np.dot(s, lam))


def _lattice_box(center, radius, step):
    axes = [step * np.arange(np.floor((c - radius) / step), np.ceil((c + radius) / step) + 1)
            for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([a.ravel() for a in mesh], axis=1)


def moreau_grid(problem: QpProblem, lam, r: float, step: float = 1e-3,
                radius: float | None = None, coarse: float = 2e-2):
    """Grid argmin and value of theta(u) + ||u - lam||^2 / (2r).

    Searches a lattice of spacing ``coarse`` on a box of half-width
    ``radius`` around lam, then the ``step`` lattice around the coarse winner.
    Only practical for one or two dual dimensions.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.size > 2:
        raise ValueError("grid search is limited to dual dimension <= 2")
    tb = _ThetaBatch(problem)
    if radius is None:
        # ||prox(lam) - lam|| = r ||s|| and ||s|| <= ||Pi_K(-h) + h||
        radius = 1.5 * r * np.linalg.norm(project(problem.cone, -problem.h) + problem.h) + 10 * coarse

    def best(pts):
        vals = tb(pts) + np.sum((pts - lam) ** 2, axis=1) / (2.0 * r)
        i = int(np.argmin(vals))
        return pts[i], float(vals[i])

    u, _ = best(_lattice_box(lam, radius, coarse))
    return best(_lattice_box(u, 3 * coarse, step))


@dataclass
class ConjugacyReport:
    theta_violation: float
    nu_violation: float
    weak_duality_violation: float
    grid_gap: float
    outside_growth: list = field(default_factory=list)

    @property
    def max_violation(self) -> float:
        return max(self.theta_violation, self.nu_violation)


def _points(grid, m):
    g = np.asarray(grid, dtype=float)
    return g.reshape(-1, 1) if m == 1 and g.ndim == 1 else np.atleast_2d(g)


def _gap(pts):
    gaps = []
    for j in range(pts.shape[1]):
        u = np.unique(pts[:, j])
        if u.size > 1:
            gaps.append(np.diff(u).max())
    return max(gaps) if gaps else 0.0


def verify_conjugacy(problem: QpProblem, lam_grid, s_grid, tol: float = 0.0,
                     nu_values=None) -> ConjugacyReport:
    """Check theta = nu* and nu = theta* on finite grids.

    Points outside dom theta or outside S drop out of the suprema. For grid
    shifts outside S, ``outside_growth`` records whether the grid sup of
    <lam, s> - theta(lam) keeps increasing as the lambda-window widens.
    """
    m = problem.m
    L = _points(lam_grid, m)
    S = _points(s_grid, m)
    gap = max(_gap(L), _gap(S))
    if tol and gap > tol:
        warnings.warn(f"grid gap {gap:g} exceeds tolerance {tol:g}", GridTooCoarse, stacklevel=2)
    th = theta_batch(problem, L)
    if nu_values is None:
        nu_values = np.array([eval_nu(problem, s).nu for s in S])
    nu = np.asarray(nu_values, dtype=float)
    fin_l, fin_s = np.isfinite(th), np.isfinite(nu)
    if not fin_l.any() or not fin_s.any():
        raise LcvError("conjugacy grids contain no finite values")
    Lf, thf, Sf, nuf = L[fin_l], th[fin_l], S[fin_s], nu[fin_s]
    nu_star = np.max(Lf @ Sf.T - nuf[None, :], axis=1)
    th_star = np.max(Sf @ Lf.T - thf[None, :], axis=1)
    theta_violation = float(np.max(np.abs(thf - nu_star)))
    nu_violation = float(np.max(np.abs(nuf - th_star)))
    weak = float(max(np.max(nu_star - thf), np.max(th_star - nuf), 0.0))
    growth = []
    norms = np.linalg.norm(Lf, axis=1)
    radii = np.linspace(norms.max() / 4, norms.max(), 4)
    for s in S[~fin_s]:
        vals = [np.max(Lf[norms <= R] @ s - thf[norms <= R]) for R in radii]
        growth.append(bool(all(b > a for a, b in zip(vals, vals[1:]))))
    return ConjugacyReport(theta_violation, nu_violation, weak, float(gap), growth)


def dual_recession_check(problem: QpProblem, lam_bar, s_bar, t_grid=(0.0, 1.0, 10.0, 100.0),
                         tol: float = 1e-6, direction=None) -> bool:
    """True iff theta_sbar(lam_bar + t d) = theta_sbar(lam_bar) for all t.

    ``d`` defaults to -s_bar, the recession direction of the dual solution
    set of the least-violation problem.
    """
    lam_bar = np.asarray(lam_bar, dtype=float)
    s_bar = np.asarray(s_bar, dtype=float)
    d = -s_bar if direction is None else np.asarray(direction, dtype=float)
    base = theta_shifted(problem, lam_bar, s_bar)
    if not np.isfinite(base):
        return False
    for t in t_grid:
        v = theta_shifted(problem, lam_bar + t * d, s_bar)
        if not np.isfinite(v) or abs(v - base) > tol * max(1.0, abs(base)):
            return False
    return True
