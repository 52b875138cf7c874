"""Minimization of the augmented Lagrangian over x in R^n, y in K.

    l_r(x, y, lam) = f(x) + <lam, g(x) - y> + r/2 ||g(x) - y||^2

Both blocks have closed-form minimizers: for fixed y the x-block is the
linear system

    (G + r H'H) x = -c - H'lam + r H'(y + h),

and for fixed x the y-block is the projection y = Pi_K(g(x) + lam/r).
Alternating the two exact minimizations gives a monotone descent scheme;
the loop itself lives in ``_kernels``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _kernels
from .cones import project
from .errors import MaxIterExceeded, SingularSystem
from .model import QpProblem

log = logging.getLogger(__name__)

TIKHONOV = 1e-12
DIVERGENCE_BOUND = 1e12
DRIFT_FRACTION = 0.5
DRIFT_MIN_ITER = 100
DRIFT_STEP_RTOL = 1e-8


@dataclass
class InnerSolution:
    x: np.ndarray
    y: np.ndarray
    objective: float
    fixed_point_residual: float
    iterations: int
    regularized: bool = False


class FactorCache:
    """Cholesky factor of M(r) = G + r H'H, rebuilt only when r changes.

    A singular M gets a Tikhonov floor ``1e-12 * ||M||`` on the diagonal and
    the cache is flagged ``regularized``.
    """

    def __init__(self, problem: QpProblem):
        self.problem = problem
        self.HtH = problem.H.T @ problem.H
        self.r = None
        self.L = None
        self.regularized = False
        self.builds = 0

    def get(self, r: float) -> np.ndarray:
        if self.r != r:
            self._build(r)
        return self.L

    def _build(self, r):
        M = self.problem.G + r * self.HtH
        M = 0.5 * (M + M.T)
        scale = max(np.linalg.norm(M, 2), 1.0)
        self.regularized = bool(np.linalg.eigvalsh(M)[0] <= TIKHONOV * scale)
        if self.regularized:
            M = M + TIKHONOV * scale * np.eye(M.shape[0])
            log.debug("M(r=%g) is singular; using Tikhonov floor %.1e", r, TIKHONOV * scale)
        try:
            L, _ = cho_factor(M, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(f"cannot factor G + r H'H at r={r}") from exc
        self.L = np.ascontiguousarray(np.tril(L))
        self.r = r
        self.builds += 1

    def solve(self, r, rhs):
        return cho_solve((self.get(r), True), rhs)


def augmented_lagrangian(problem: QpProblem, x, y, lam, r) -> float:
    d = problem.H @ x - problem.h - y
    return problem.objective(x) + float(lam @ d) + 0.5 * r * float(d @ d)


def minimize_l_r(problem: QpProblem, lam, r: float, inner_tol: float = 1e-10,
                 max_iter: int = 100_000, x0=None, y0=None,
                 cache: FactorCache | None = None) -> InnerSolution:
    """Minimize l_r(., ., lam) by exact alternating block minimization.

    Stops once max(||dx||_inf, ||dy||_inf) <= inner_tol. Raises
    ``MaxIterExceeded`` (with the last iterate in ``.best``) on the iteration
    cap or when the iterates blow up or drift off along a straight line,
    which happens when lam is outside the domain of the dual function.
    """
    if not r > 0:
        raise ValueError("penalty r must be positive")
    lam = np.asarray(lam, dtype=float)
    if cache is None:
        cache = FactorCache(problem)
    L = cache.get(r)
    H, h, K = problem.H, problem.h, problem.cone
    x = np.zeros(problem.n) if x0 is None else np.array(x0, dtype=float)
    y = project(K, -h + lam / r) if y0 is None else np.array(y0, dtype=float)
    b0 = -problem.c - H.T @ lam + r * (H.T @ h)
    Hc = np.ascontiguousarray(H)
    lam_r = lam / r
    x_start = x.copy()

    def run(count):
        return _kernels.alternating(L, Hc, h, b0, lam_r, float(r), K.kinds, K.offsets, K.dims,
                                    K.lower, K.upper, x, y, float(inner_tol), int(count),
                                    DIVERGENCE_BOUND)

    it, res, status = run(max_iter)
    if status == _kernels.MAX_ITER and it >= DRIFT_MIN_ITER and _drifting(x, x_start, it, run):
        status = _kernels.DIVERGED
    sol = InnerSolution(x, y, augmented_lagrangian(problem, x, y, lam, r), float(res),
                        int(it), cache.regularized)
    if status == _kernels.DIVERGED:
        exc = MaxIterExceeded(f"inner iterates diverged after {it} iterations "
                              f"(lambda likely outside dom theta)", best=sol)
        exc.diverged = True
        raise exc
    if status == _kernels.MAX_ITER:
        exc = MaxIterExceeded(f"inner solve stalled at residual {res:.3e} after {it} iterations",
                              best=sol)
        exc.diverged = False
        raise exc
    return sol


def _drifting(x, x_start, it, run) -> bool:
    """Steady straight-line motion of x: the signature of an unbounded l_r."""
    before = x.copy()
    run(1)
    dx = float(np.linalg.norm(x - before))
    if dx <= DRIFT_STEP_RTOL * (1.0 + float(np.linalg.norm(x))):
        return False
    return float(np.linalg.norm(x - x_start)) >= DRIFT_FRACTION * (it + 1) * dx


def stationarity_residual(problem: QpProblem, lam, r: float, sol: InnerSolution) -> float:
    """max(||grad_x l_r||_inf, ||y - Pi_K(y - grad_y l_r)||_inf)."""
    x, y = sol.x, sol.y
    d = problem.H @ x - problem.h - y
    gx = problem.G @ x + problem.c + problem.H.T @ (lam + r * d)
    gy = -(lam + r * d)
    ry = y - project(problem.cone, y - gy)
    return float(max(np.abs(gx).max(initial=0.0), np.abs(ry).max(initial=0.0)))
