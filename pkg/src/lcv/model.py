"""Convex QP with affine-conic constraints.

    minimize    1/2 x'Gx + c'x
    subject to  g(x) + s in K,   g(x) = Hx - h

with G symmetric positive semidefinite. ``s = 0`` is the original problem;
other shifts give the perturbed problems whose feasible-shift set S is
studied by the oracle and diagnostics.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cones import ConeSpec
from .errors import DimensionMismatch, EmptyCone, NotPsd

PSD_TOL = 1e-10
SYM_TOL = 1e-10


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QpProblem:
    G: np.ndarray
    c: np.ndarray
    H: np.ndarray
    h: np.ndarray
    cone: ConeSpec

    def __post_init__(self):
        c = _readonly(np.atleast_1d(self.c))
        h = _readonly(np.atleast_1d(self.h))
        G = _readonly(np.atleast_2d(self.G))
        H = _readonly(np.atleast_2d(self.H))
        for name, val in (("G", G), ("c", c), ("H", H), ("h", h)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.h.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.G @ x + self.c @ x)

    def shifted(self, s) -> "QpProblem":
        """The problem with constraint g(x) + s in K, as g'(x) = Hx - (h - s)."""
        return QpProblem(self.G, self.c, self.H, self.h - np.asarray(s, dtype=float), self.cone)

    def __eq__(self, other):
        if not isinstance(other, QpProblem):
            return NotImplemented
        return (all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "GcHh")
                and self.cone == other.cone)


def validate(problem: QpProblem, psd_tol: float = PSD_TOL) -> None:
    """Raise if dimensions disagree, the cone is empty or G is not PSD."""
    G, c, H, h = problem.G, problem.c, problem.H, problem.h
    n = c.shape[0]
    if n < 1:
        raise DimensionMismatch("need at least one variable")
    if G.shape != (n, n):
        raise DimensionMismatch(f"G has shape {G.shape}, expected ({n}, {n})")
    if H.ndim != 2 or H.shape[1] != n:
        raise DimensionMismatch(f"H has shape {H.shape}, expected (m, {n})")
    if h.shape[0] != H.shape[0]:
        raise DimensionMismatch(f"h has length {h.shape[0]} but H has {H.shape[0]} rows")
    if len(problem.cone) == 0:
        raise EmptyCone("constraint cone has no blocks")
    if problem.cone.total_dim != H.shape[0]:
        raise DimensionMismatch(
            f"cone blocks sum to {problem.cone.total_dim} rows but H has {H.shape[0]}")
    for name, arr in (("G", G), ("c", c), ("H", H), ("h", h)):
        if not np.isfinite(arr).all():
            raise DimensionMismatch(f"{name} has non-finite entries")
    scale = max(1.0, float(np.abs(G).max(initial=0.0)))
    if np.abs(G - G.T).max(initial=0.0) > SYM_TOL * scale:
        raise NotPsd("G is not symmetric")
    lam_min = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
    if lam_min < -psd_tol * scale:
        raise NotPsd(f"G has eigenvalue {lam_min:.3e}")


def eval_constraint(problem: QpProblem, x) -> np.ndarray:
    """g(x) = Hx - h."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise DimensionMismatch(f"x has shape {x.shape}, expected ({problem.n},)")
    return problem.H @ x - problem.h


class CertificateKind(str, enum.Enum):
    SHIFT_SET_CLOSED = "ShiftSetClosed"
    LEVEL_BOUNDED = "LevelBounded"
    UNBOUNDED_BELOW = "UnboundedBelow"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    direction: np.ndarray | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind.value,
                "direction": None if self.direction is None else self.direction.tolist(),
                "detail": self.detail}


@dataclass(frozen=True)
class ShiftVector:
    s: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.s))
