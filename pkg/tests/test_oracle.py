import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcv import instances, oracle
from lcv.cones import ConeSpec, NonPos, SecondOrder
from lcv.errors import LcvError
from lcv.model import QpProblem

# least-shift norms for generate(family, 5, 7, 42); cross-checked once against an
# independent interior-point solve of min ||s||^2 (agreement ~5e-13)
FROZEN_SHIFT_NORMS = {
    "feasible_qp": 0.0,
    "infeasible_halfspaces": 1.3033055376045997,
    "inconsistent_equalities": 0.9020507361705948,
    "random_infeasible": 1.2209592062112669,
}
FROZEN_NU_FEASIBLE = -1.1657899524111401


@pytest.mark.parametrize("family", instances.FAMILIES)
def test_frozen_shift_norms(family):
    assert abs(oracle.least_shift(instances.generate(family, 5, 7, 42)).norm
               - FROZEN_SHIFT_NORMS[family]) <= 1e-9


def test_frozen_nu():
    assert abs(oracle.eval_nu(instances.generate("feasible_qp", 5, 7, 42)).nu
               - FROZEN_NU_FEASIBLE) <= 1e-9


def test_least_shift_examples(two_halfspace, inconsistent):
    res = oracle.least_shift(two_halfspace)
    assert np.allclose(res.s, [-1.0, -1.0], atol=1e-12)
    assert abs(res.norm - np.sqrt(2)) < 1e-12
    assert np.allclose(oracle.least_shift(inconsistent).s, [-1.0, 1.0], atol=1e-12)
    assert oracle.least_shift(instances.feasible_1d()).norm == 0.0


def test_least_shift_soc():
    # (t, z) = (x - 1, 2) can never satisfy |z| <= t... unless x >= 3: feasible
    p = QpProblem([[1.0]], [0.0], [[1.0], [0.0]], [1.0, -2.0], ConeSpec([SecondOrder(2)]))
    assert oracle.least_shift(p).norm < 1e-10
    # (t, z) = (-1, 2) is constant: nearest cone point to (-1, 2) is (0.5, 0.5)
    q = QpProblem([[1.0]], [0.0], [[0.0], [0.0]], [1.0, -2.0], ConeSpec([SecondOrder(2)]))
    assert np.allclose(oracle.least_shift(q).s, [1.5, -1.5], atol=1e-10)


def test_least_shift_restarts_agree():
    p = instances.random_infeasible(6, 9, 5)
    a = oracle.least_shift(p, restarts=0)
    b = oracle.least_shift(p, restarts=4, seed=3)
    assert np.abs(a.s - b.s).max() < 1e-9


def test_eval_nu_examples(two_halfspace):
    p = QpProblem([[2.0]], [0.0], [[1.0]], [1.0], ConeSpec([NonPos(1)]))
    assert abs(oracle.eval_nu(p).nu) < 1e-12
    v = oracle.eval_nu(two_halfspace, [-1.0, -1.0])
    assert abs(v.nu - 1.0) < 1e-10 and np.allclose(v.argmin, [1.0])
    out = oracle.eval_nu(two_halfspace, [0.0, 0.0])
    assert out.nu == np.inf and out.certificate is not None


def test_eval_nu_unbounded():
    p = QpProblem([[0.0]], [1.0], [[1.0]], [0.0], ConeSpec([NonPos(1)]))
    assert oracle.eval_nu(p).nu == -np.inf


def test_eval_theta_example():
    p = QpProblem([[2.0]], [0.0], [[1.0]], [0.0], ConeSpec([NonPos(1)]))
    assert abs(oracle.eval_theta(p, [1.0]).theta - 0.25) < 1e-15
    assert oracle.eval_theta(p, [-1.0]).theta == np.inf


def test_theta_two_halfspace_closed_form(two_halfspace):
    # theta(lam) = (lam1 - lam2)^2 / 4 - 2 lam2 on lam >= 0
    rng = np.random.default_rng(0)
    lams = rng.uniform(0, 5, (50, 2))
    want = (lams[:, 0] - lams[:, 1]) ** 2 / 4 - 2 * lams[:, 1]
    assert np.allclose(oracle.theta_batch(two_halfspace, lams), want, atol=1e-12)


def test_theta_outside_range_of_objective():
    # G = 0: inf_x f + <lam, g> is finite only when c + H'lam = 0
    p = QpProblem([[0.0]], [1.0], [[1.0]], [0.0], ConeSpec([NonPos(1)]))
    assert all(oracle.eval_theta(p, [v]).theta == np.inf for v in (-1.0, 0.5, 1.0))
    q = QpProblem([[0.0]], [-1.0], [[1.0]], [0.0], ConeSpec([NonPos(1)]))
    assert oracle.eval_theta(q, [1.0]).theta == 0.0
    assert oracle.eval_theta(q, [0.5]).theta == np.inf


@given(st.integers(0, 2**32 - 1))
def test_theta_batch_matches_scalar(seed):
    p = instances.random_infeasible(4, 6, seed)
    lams = np.random.default_rng(seed).standard_normal((8, 6))
    lams[:4] = np.abs(lams[:4])
    batch = oracle.theta_batch(p, lams)
    for lam, b in zip(lams, batch):
        t = oracle.eval_theta(p, lam).theta
        assert (np.isinf(t) and np.isinf(b)) or abs(t - b) <= 1e-9 * (1 + abs(t))


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_weak_duality(seed):
    # Fenchel-Young: theta(lam) + nu(s) >= <lam, s>
    p = instances.feasible_qp(3, 4, seed)
    rng = np.random.default_rng(seed)
    lam = np.abs(rng.standard_normal(4))
    s = rng.standard_normal(4)
    th = oracle.eval_theta(p, lam).theta
    nu = oracle.eval_nu(p, s).nu
    assert th + nu >= lam @ s - 1e-7 * (1 + abs(th) + abs(nu))


def test_moreau_grid_first_prox(two_halfspace):
    arg, val = oracle.moreau_grid(two_halfspace, np.zeros(2), 1.0)
    assert np.allclose(arg, [0.5, 1.5], atol=1e-9)
    # envelope value theta(P) + ||P||^2 / 2 = -2.75 + 1.25
    assert abs(val - (-1.5)) < 1e-9


def test_moreau_grid_rejects_large_dual():
    with pytest.raises(ValueError):
        oracle.moreau_grid(instances.random_infeasible(3, 3, 0), np.zeros(3), 1.0)


def test_dual_recession(two_halfspace):
    assert oracle.dual_recession_check(two_halfspace, [0.0, 2.0], [-1.0, -1.0])
    assert not oracle.dual_recession_check(two_halfspace, [0.0, 2.0], [-1.0, -1.0],
                                           direction=[1.0, 1.1])
    assert not oracle.dual_recession_check(two_halfspace, [-1.0, 2.0], [-1.0, -1.0])


def test_conjugacy_feasible():
    rep = oracle.verify_conjugacy(instances.feasible_1d(), np.linspace(-2, 8, 1001),
                                  np.linspace(-3, 3, 61))
    assert rep.max_violation <= 5 * rep.grid_gap
    assert rep.weak_duality_violation <= 1e-9


def test_conjugacy_outside_shift_set_grows():
    rep = oracle.verify_conjugacy(instances.infeasible_1d(), np.linspace(-2, 8, 1001),
                                  np.linspace(-3, 3, 61))
    assert rep.outside_growth and all(rep.outside_growth)


def test_conjugacy_coarse_grid_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        oracle.verify_conjugacy(instances.feasible_1d(), np.linspace(0, 4, 5),
                                np.linspace(-1, 1, 5), tol=1e-3)
    assert any(issubclass(w.category, oracle.GridTooCoarse) for w in caught)


def test_conjugacy_needs_finite_values():
    with pytest.raises(LcvError):
        oracle.verify_conjugacy(instances.feasible_1d(), [-2.0, -1.0], [0.0])
