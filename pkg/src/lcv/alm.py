"""Augmented Lagrangian outer loop.

Each outer iteration minimizes l_{r_k}(., ., lam^k) over R^n x K, updates

    lam^{k+1} = lam^k + r_k (g(x^{k+1}) - y^{k+1})

and picks r_{k+1} >= r_k. The shift s^k = y^k - g(x^k) is tracked; when the
constraints are infeasible it tends to the least-violation shift while the
multipliers drift off along -s.
"""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .cones import project
from .errors import MaxIterExceeded
from .inner import FactorCache, InnerSolution, minimize_l_r, stationarity_residual
from .model import QpProblem, ShiftVector

log = logging.getLogger(__name__)

FEASIBLE_OPTIMAL = "FeasibleOptimal"
LEAST_VIOLATION = "LeastViolationSolution"
MAX_OUTER = "MaxOuterExceeded"
UNBOUNDED = "UnboundedDetected"

TRACE_COLUMNS = ("k", "r", "shift_norm", "opt_residual", "proj_residual",
                 "lambda_norm", "inner_iters", "l_r_value")


@dataclass(frozen=True)
class AlmConfig:
    r0: float = 1.0
    r_growth: float = 1.0
    r_max: float = 1e6
    tol: float = 1e-8
    max_outer: int = 1000
    inner_tol: float | None = None
    inner_max_iter: int = 100_000

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.r_growth < 1:
            raise ValueError("r_growth must be >= 1 so that r_k is nondecreasing")
        if self.r_max < self.r0:
            raise ValueError("r_max must be >= r0")
        if not self.tol >= 0 or self.max_outer < 1:
            raise ValueError("tol must be >= 0 and max_outer >= 1")

    def penalty(self, k: int) -> float:
        """r_k = min(r_max, r0 * r_growth**k)."""
        if self.r_growth == 1.0:
            return self.r0
        return float(min(self.r_max, self.r0 * self.r_growth ** min(k, 10_000)))

    @property
    def effective_inner_tol(self) -> float:
        if self.inner_tol is not None:
            return self.inner_tol
        return min(1e-8, 0.1 * self.tol) if self.tol > 0 else 1e-12


@dataclass
class AlmState:
    k: int
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    r: float
    s: np.ndarray
    shift_norm: float
    opt_residual: float
    proj_residual: float
    lam_norm: float
    lam_prev: np.ndarray | None = None
    inner_iters: int = 0
    l_r_value: float = float("nan")

    def record(self) -> dict:
        return {"k": self.k, "r": self.r, "shift_norm": self.shift_norm,
                "opt_residual": self.opt_residual, "proj_residual": self.proj_residual,
                "lambda_norm": self.lam_norm, "inner_iters": self.inner_iters,
                "l_r_value": self.l_r_value}


@dataclass
class SolveReport:
    status: str
    state: AlmState
    shift: ShiftVector
    trace: list = field(default_factory=list)
    elapsed: float = 0.0
    message: str = ""

    @property
    def x(self):
        return self.state.x

    @property
    def converged(self) -> bool:
        return self.status in (FEASIBLE_OPTIMAL, LEAST_VIOLATION)


def _measure(problem: QpProblem, x, y):
    g = problem.H @ x - problem.h
    s = y - g
    opt = float(np.abs(problem.H.T @ (g - y)).max(initial=0.0))
    proj = float(np.abs(project(problem.cone, g) - y).max(initial=0.0))
    return s, opt, proj


def initial_state(problem: QpProblem, config: AlmConfig, lam0=None) -> AlmState:
    lam = np.zeros(problem.m) if lam0 is None else np.array(lam0, dtype=float)
    if lam.shape != (problem.m,) or not np.isfinite(lam).all():
        raise ValueError(f"lambda0 must be a finite vector of length {problem.m}")
    x = np.zeros(problem.n)
    y = project(problem.cone, -problem.h + lam / config.r0)
    s, opt, proj = _measure(problem, x, y)
    return AlmState(0, x, y, lam, config.r0, s, float(np.linalg.norm(s)), opt, proj,
                    float(np.linalg.norm(lam)))


def step(state: AlmState, problem: QpProblem, config: AlmConfig,
         cache: FactorCache | None = None) -> AlmState:
    """One outer iteration: inner solve, multiplier update, next penalty."""
    r = config.penalty(state.k)
    sol = minimize_l_r(problem, state.lam, r, config.effective_inner_tol,
                       config.inner_max_iter, x0=state.x, y0=state.y, cache=cache)
    g = problem.H @ sol.x - problem.h
    lam = state.lam + r * (g - sol.y)
    s, opt, proj = _measure(problem, sol.x, sol.y)
    return AlmState(state.k + 1, sol.x, sol.y, lam, r, s, float(np.linalg.norm(s)), opt, proj,
                    float(np.linalg.norm(lam)), lam_prev=state.lam,
                    inner_iters=sol.iterations, l_r_value=sol.objective)


SETTLE_WINDOW = 10
SETTLE_RTOL = 1e-3


def _should_stop(prev: AlmState, cur: AlmState, tol: float, norms=()) -> bool:
    """Residuals below tol and the shift either vanished or settled.

    Settled means the last step moved s by at most tol and ||s|| fell by at
    min(tol, SETTLE_RTOL * ||s||) over the last SETTLE_WINDOW iterations; a
    shift still shrinking linearly towards 0 (feasible case) therefore keeps
    the loop running.
    """
    if cur.opt_residual > tol or cur.proj_residual > tol:
        return False
    if cur.shift_norm <= tol:
        return True
    if float(np.abs(cur.s - prev.s).max(initial=0.0)) > tol:
        return False
    return len(norms) > SETTLE_WINDOW and norms[-1 - SETTLE_WINDOW] - cur.shift_norm <= min(
        tol, SETTLE_RTOL * cur.shift_norm)


def solve(problem: QpProblem, config: AlmConfig | None = None, lam0=None,
          on_iter=None) -> SolveReport:
    """Run the method until the residual pair drops below ``config.tol``.

    ``on_iter(state)`` is called after every outer iteration when given.
    """
    config = config or AlmConfig()
    cache = FactorCache(problem)
    t0 = time.perf_counter()
    state = initial_state(problem, config, lam0)
    trace = []
    norms = [state.shift_norm]
    status = MAX_OUTER
    message = ""
    while state.k < config.max_outer:
        try:
            new = step(state, problem, config, cache)
        except MaxIterExceeded as exc:
            if getattr(exc, "diverged", False) and _unbounded(problem):
                status, message = UNBOUNDED, str(exc)
                break
            raise
        trace.append(new.record())
        if on_iter is not None:
            on_iter(new)
        norms.append(new.shift_norm)
        stop = _should_stop(state, new, config.tol, norms)
        state = new
        if stop:
            status = FEASIBLE_OPTIMAL if state.shift_norm <= config.tol else LEAST_VIOLATION
            break
    if cache.regularized:
        message = (message + "; " if message else "") + "linear solves used a Tikhonov floor"
    elapsed = time.perf_counter() - t0
    log.info("alm: %s after %d outer iterations, ||s|| = %.6g (%.3fs)",
             status, state.k, state.shift_norm, elapsed)
    return SolveReport(status, state, ShiftVector(state.s.copy()), trace, elapsed, message)


def _unbounded(problem: QpProblem) -> bool:
    from .diagnostics import check_unbounded_below
    from .model import CertificateKind

    if not problem.cone.is_polyhedral:
        return False
    return check_unbounded_below(problem).kind is CertificateKind.UNBOUNDED_BELOW


def optimality_residuals(problem: QpProblem, x, y, lam, r) -> dict:
    """The three quantities that certify a least-violation solution.

    ``argmin`` is the stationarity residual of l_r(., ., lam) at (x, y),
    ``adjoint`` is ||H'(g(x) - y)||_inf and ``projection`` is
    ||Pi_K(g(x)) - y||_inf.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    sol = InnerSolution(x, y, float("nan"), 0.0, 0)
    _, opt, proj = _measure(problem, x, y)
    return {"argmin": stationarity_residual(problem, lam, r, sol),
            "adjoint": opt, "projection": proj}


def check_optimality_certificate(problem: QpProblem, x, y, lam, r: float, tol: float) -> bool:
    if not r > 0:
        raise ValueError("r must be positive")
    res = optimality_residuals(problem, x, y, lam, r)
    return all(v <= tol for v in res.values())


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS)
        w.writeheader()
        for rec in trace:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in rec.items()})


__all__ = ["AlmConfig", "AlmState", "SolveReport", "solve", "step", "initial_state",
           "check_optimality_certificate", "optimality_residuals", "write_trace_csv",
           "FEASIBLE_OPTIMAL", "LEAST_VIOLATION", "MAX_OUTER", "UNBOUNDED"]
