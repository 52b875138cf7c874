"""Named fixtures and seeded instance families.

The same (family, n, m, seed) always yields a bit-identical problem.
"""
from __future__ import annotations

import numpy as np

from .cones import ConeSpec, NonPos, Zero
from .model import QpProblem

FAMILIES = ("feasible_qp", "infeasible_halfspaces", "inconsistent_equalities", "random_infeasible")


def two_halfspace() -> QpProblem:
    """min x^2 s.t. x <= 0, x >= 2 written as g(x) = (x, 2 - x) <= 0."""
    return QpProblem([[2.0]], [0.0], [[1.0], [-1.0]], [0.0, -2.0], ConeSpec([NonPos(2)]))


def inconsistent_equalities() -> QpProblem:
    """min (x - 5)^2 s.t. x = 0, x = 2 (constant 25 dropped)."""
    return QpProblem([[2.0]], [-10.0], [[1.0], [1.0]], [0.0, 2.0], ConeSpec([Zero(2)]))


def feasible_1d() -> QpProblem:
    """min x^2 s.t. x >= 1; one dual dimension."""
    return QpProblem([[2.0]], [0.0], [[-1.0]], [-1.0], ConeSpec([NonPos(1)]))


def infeasible_1d() -> QpProblem:
    """min x^2 s.t. 1 <= 0; one dual dimension, S = {s <= -1}."""
    return QpProblem([[2.0]], [0.0], [[0.0]], [-1.0], ConeSpec([NonPos(1)]))


def _objective(rng, n):
    B = rng.standard_normal((n, n))
    G = B @ B.T / n + 0.1 * np.eye(n)
    return 0.5 * (G + G.T), rng.standard_normal(n)


def feasible_qp(n, m, seed) -> QpProblem:
    rng = np.random.default_rng(seed)
    G, c = _objective(rng, n)
    q = min(m // 4, n - 1)
    H = rng.standard_normal((m, n))
    x0 = rng.standard_normal(n)
    h = H @ x0
    h[q:] += rng.uniform(0.1, 1.0, m - q)
    blocks = ([Zero(q)] if q else []) + [NonPos(m - q)]
    return QpProblem(G, c, H, h, ConeSpec(blocks))


def infeasible_halfspaces(n, m, seed) -> QpProblem:
    """Opposing halfspace pairs a'x <= b, a'x >= b + gap plus loose extra rows."""
    if m < 2:
        raise ValueError("need m >= 2 for an opposing pair")
    rng = np.random.default_rng(seed)
    G, c = _objective(rng, n)
    pairs = max(1, m // 3)
    H = np.empty((m, n))
    h = np.empty(m)
    for j in range(pairs):
        a = rng.standard_normal(n)
        beta = rng.standard_normal()
        gap = rng.uniform(0.5, 2.0)
        H[2 * j], h[2 * j] = a, beta
        H[2 * j + 1], h[2 * j + 1] = -a, -(beta + gap)
    rest = m - 2 * pairs
    if rest:
        x0 = rng.standard_normal(n)
        H[2 * pairs:] = rng.standard_normal((rest, n))
        h[2 * pairs:] = H[2 * pairs:] @ x0 + rng.uniform(0.1, 1.0, rest)
    return QpProblem(G, c, H, h, ConeSpec([NonPos(m)]))


def inconsistent_equalities_family(n, m, seed) -> QpProblem:
    if m < 2:
        raise ValueError("need m >= 2 equalities to be inconsistent")
    rng = np.random.default_rng(seed)
    G, c = _objective(rng, n)
    H = rng.standard_normal((m, n))
    if m <= n:
        H[-1] = rng.standard_normal(m - 1) @ H[:-1]
    h = rng.standard_normal(m)
    return QpProblem(G, c, H, h, ConeSpec([Zero(m)]))


def random_infeasible(n, m, seed) -> QpProblem:
    """Equality and inequality rows with a built-in Farkas certificate.

    u with u >= 0 on inequality rows, H'u = 0 and u'h < 0 rules out
    Hx - h in {0} x R_-.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    rng = np.random.default_rng(seed)
    G, c = _objective(rng, n)
    q = m // 5
    H = rng.standard_normal((m, n))
    u = np.concatenate([rng.standard_normal(q), rng.uniform(0.5, 1.5, m - q)])
    H[-1] = -(u[:-1] @ H[:-1]) / u[-1]
    h = rng.standard_normal(m)
    delta = rng.uniform(0.5, 2.0) * np.linalg.norm(u)
    h -= (u @ h + delta) / (u @ u) * u
    blocks = ([Zero(q)] if q else []) + [NonPos(m - q)]
    return QpProblem(G, c, H, h, ConeSpec(blocks))


_GENERATORS = {
    "feasible_qp": feasible_qp,
    "infeasible_halfspaces": infeasible_halfspaces,
    "inconsistent_equalities": inconsistent_equalities_family,
    "random_infeasible": random_infeasible,
}


def generate(family: str, n: int, m: int, seed: int) -> QpProblem:
    try:
        gen = _GENERATORS[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    return gen(int(n), int(m), int(seed))


def infeasible_corpus(count: int = 100, seed: int = 2024, max_dim: int = 20):
    """Seeded mix of the three infeasible families with n, m <= max_dim."""
    rng = np.random.default_rng(seed)
    fams = ("infeasible_halfspaces", "inconsistent_equalities", "random_infeasible")
    out = []
    for i in range(count):
        fam = fams[i % 3]
        n = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(2, max_dim + 1))
        out.append((fam, n, m, int(rng.integers(2**63)), None))
    return [(f, n, m, s, generate(f, n, m, s)) for f, n, m, s, _ in out]


def feasible_corpus(count: int = 50, seed: int = 7, max_dim: int = 20):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(1, max_dim + 1))
        s = int(rng.integers(2**63))
        out.append(("feasible_qp", n, m, s, feasible_qp(n, m, s)))
    return out
