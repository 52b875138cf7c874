import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lcv.cones import (Box, ConeError, ConeSpec, NonPos, SecondOrder, Zero, block_from_record,
                       block_to_record, in_cone, project, recession_kinds, support_function)
from lcv.errors import DimensionMismatch

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def vec(m):
    return arrays(np.float64, m, elements=finite)


def mixed_spec():
    return ConeSpec([Zero(1), NonPos(2), Box([-1.0, -np.inf], [2.0, 0.5]), SecondOrder(3)])


def test_zero_kills_everything():
    assert project(ConeSpec([Zero(2)]), [3.0, -1.0]).tolist() == [0.0, 0.0]


def test_nonpos_clamps():
    assert project(ConeSpec([NonPos(3)]), [-2.0, 0.0, 5.0]).tolist() == [-2.0, 0.0, 0.0]


def test_soc_middle_case():
    p = project(ConeSpec([SecondOrder(3)]), [0.0, 1.0, 1.0])
    assert np.allclose(p, np.sqrt(2) / 2 * np.array([1, 1 / np.sqrt(2), 1 / np.sqrt(2)]), atol=1e-15)


def test_soc_inside_and_polar():
    K = ConeSpec([SecondOrder(3)])
    assert project(K, [2.0, 1.0, -1.0]).tolist() == [2.0, 1.0, -1.0]
    assert project(K, [-2.0, 1.0, -1.0]).tolist() == [0.0, 0.0, 0.0]


def test_soc_against_brute_force():
    # minimize ||y - u|| over a polar grid of the 2-D cone {|z| <= t}
    y = np.array([0.3, -1.7])
    t = np.linspace(0, 3, 3001)
    cand = np.concatenate([np.stack([t, t], 1), np.stack([t, -t], 1)])
    best = cand[np.argmin(np.linalg.norm(cand - y, axis=1))]
    assert np.allclose(project(ConeSpec([SecondOrder(2)]), y), best, atol=1e-3)


def test_box_clamps_with_infinite_bounds():
    K = ConeSpec([Box([-1.0, -np.inf], [1.0, 0.0])])
    assert project(K, [5.0, -7.0]).tolist() == [1.0, -7.0]


@pytest.mark.parametrize("lam,expected", [([1.0, 2.0], 0.0), ([-1.0, 2.0], np.inf)])
def test_support_nonpos(lam, expected):
    assert support_function(ConeSpec([NonPos(2)]), lam) == expected


def test_support_zero_and_box_and_soc():
    assert support_function(ConeSpec([Zero(3)]), [4.0, -2.0, 9.0]) == 0.0
    assert support_function(ConeSpec([Box([-1.0, 0.0], [2.0, 3.0])]), [1.0, -1.0]) == 2.0
    assert support_function(ConeSpec([Box([-np.inf], [1.0])]), [-1.0]) == np.inf
    K = ConeSpec([SecondOrder(3)])
    assert support_function(K, [-2.0, 1.0, 1.0]) == 0.0
    assert support_function(K, [1.0, 0.0, 0.0]) == np.inf


def test_in_cone_examples():
    assert in_cone(ConeSpec([NonPos(1)]), [-0.5], 0.0)
    assert in_cone(ConeSpec([NonPos(1)]), [1e-9], 1e-8)
    assert not in_cone(ConeSpec([Zero(1)]), [0.1], 1e-8)
    with pytest.raises(ValueError):
        in_cone(ConeSpec([Zero(1)]), [0.0], -1.0)


def test_dimension_mismatch_names_last_block():
    with pytest.raises(DimensionMismatch, match="SecondOrder"):
        project(mixed_spec(), np.zeros(3))


@pytest.mark.parametrize("bad", [lambda: Zero(0), lambda: Box([1.0], [0.0]),
                                 lambda: Box([0.0, 1.0], [1.0])])
def test_malformed_blocks(bad):
    with pytest.raises(ConeError):
        bad()


def test_records_round_trip():
    for b in mixed_spec():
        assert block_from_record(block_to_record(b)) == b
    with pytest.raises(ConeError):
        block_from_record({"cube": 3})


def test_recession_masks():
    up, lo = recession_kinds(ConeSpec([Zero(1), NonPos(1), Box([-np.inf, 0.0], [1.0, np.inf])]))
    assert up.tolist() == [True, True, True, False]
    assert lo.tolist() == [True, False, False, True]
    with pytest.raises(ConeError):
        recession_kinds(ConeSpec([SecondOrder(2)]))


@given(vec(8))
def test_idempotent(y):
    K = mixed_spec()
    p = project(K, y)
    assert np.abs(project(K, p) - p).max() <= 1e-12 * (1 + np.abs(y).max())


@given(vec(8), vec(8))
def test_nonexpansive(a, b):
    K = mixed_spec()
    assert np.linalg.norm(project(K, a) - project(K, b)) <= np.linalg.norm(a - b) * (1 + 1e-12) + 1e-12


@given(vec(8), vec(8))
def test_variational_inequality(y, z):
    # <y - P(y), w - P(y)> <= 0 for every w in K
    K = mixed_spec()
    p = project(K, y)
    w = project(K, z)
    assert (y - p) @ (w - p) <= 1e-10 * (1 + np.abs(y).max() * (1 + np.abs(z).max()))


@given(vec(8))
def test_support_matches_projection_decomposition(lam):
    # for a cone, sigma_K(lam) is 0 on the polar and lam = P_K(lam) + P_polar(lam)
    K = ConeSpec([Zero(1), NonPos(2), SecondOrder(5)])
    sig = support_function(K, lam)
    pk = project(K, lam)
    if sig == 0.0:
        assert np.abs(pk).max() <= 1e-9 * (1 + np.abs(lam).max())
    else:
        assert np.isinf(sig) and np.abs(pk).max() > 0
