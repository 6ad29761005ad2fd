import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tightframe import (
    UnitVectorSystem,
    certify,
    frame_operator,
    frame_potential,
    gram_matrix,
    hs_norm,
    mercedes_benz,
    optimality_gap,
    potential_lower_bound,
)

from conftest import random_system


def double_sum_potential(x):
    total = 0.0
    for u in x:
        for v in x:
            total += float(u @ v) ** 2
    return total


def sum_of_outers(x):
    s = np.zeros((x.shape[1], x.shape[1]))
    for u in x:
        s += np.outer(u, u)
    return s


E1E1 = UnitVectorSystem([[1.0, 0.0], [1.0, 0.0]])
E1E1E2 = UnitVectorSystem([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_system_validation():
    with pytest.raises(ValueError):
        UnitVectorSystem([[1.0, 1.0]])
    with pytest.raises(ValueError):
        UnitVectorSystem(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        UnitVectorSystem([[np.nan, 1.0]])


def test_from_rows_renormalizes_rounding_only():
    sys_ = UnitVectorSystem.from_rows([[0.6000001, 0.8]])
    assert np.linalg.norm(sys_[0]) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        UnitVectorSystem.from_rows([[0.61, 0.8]])


def test_random_is_seeded():
    a = UnitVectorSystem.random(3, 5, 7)
    b = UnitVectorSystem.random(3, 5, 7)
    assert np.array_equal(a.vectors, b.vectors)
    assert a.dim == 3 and a.count == 5


def test_frame_operator_examples():
    np.testing.assert_array_equal(frame_operator(UnitVectorSystem(np.eye(3))), np.eye(3))
    np.testing.assert_array_equal(frame_operator(E1E1), np.diag([2.0, 0.0]))
    mb = mercedes_benz()
    np.testing.assert_allclose(frame_operator(mb), sum_of_outers(mb.vectors), atol=1e-15)
    np.testing.assert_allclose(frame_operator(mb), 1.5 * np.eye(2), atol=1e-12)


def test_gram_examples():
    np.testing.assert_array_equal(gram_matrix(UnitVectorSystem(np.eye(4))), np.eye(4))
    np.testing.assert_array_equal(gram_matrix(E1E1), np.ones((2, 2)))


def test_potential_examples():
    assert frame_potential(UnitVectorSystem(np.eye(5))) == 5.0
    assert frame_potential(E1E1) == 4.0
    assert frame_potential(mercedes_benz()) == pytest.approx(double_sum_potential(mercedes_benz().vectors), abs=1e-14)
    assert frame_potential(mercedes_benz()) == pytest.approx(4.5, abs=1e-12)


def test_lower_bound():
    assert potential_lower_bound(2, 3) == 4.5
    assert potential_lower_bound(5, 3) == 3
    assert potential_lower_bound(4, 4) == 4
    with pytest.raises(ValueError):
        potential_lower_bound(0, 3)


def test_potential_identity_and_bounds(rng):
    for n in range(1, 9):
        for count in range(1, 17):
            s = random_system(rng, n, count)
            fp = frame_potential(s)
            S, G = frame_operator(s), gram_matrix(s)
            assert fp == pytest.approx(double_sum_potential(s.vectors), abs=1e-9)
            assert fp == pytest.approx(hs_norm(S) ** 2, abs=1e-9)
            assert fp == pytest.approx(hs_norm(G) ** 2, abs=1e-9)
            assert fp >= potential_lower_bound(n, count) - 1e-9
            assert np.trace(S) == pytest.approx(count, abs=1e-10 * count)
            np.testing.assert_allclose(np.diag(G), 1.0, atol=1e-12)
            assert np.linalg.matrix_rank(G, tol=1e-8) <= n
            assert np.linalg.eigvalsh(S).min() >= -1e-12


def test_optimality_gap_matches_potential_excess(rng):
    for n, count in [(2, 3), (3, 7), (5, 3), (4, 4)]:
        s = random_system(rng, n, count)
        assert optimality_gap(s) ** 2 == pytest.approx(frame_potential(s) - potential_lower_bound(n, count), abs=1e-10)


def test_certify_examples():
    c = certify(UnitVectorSystem(np.eye(3)))
    assert c.is_tight and c.is_orthonormal_set and c.lambda_estimate == 1.0

    c = certify(mercedes_benz())
    assert c.is_tight and not c.is_orthonormal_set
    assert c.lambda_estimate == pytest.approx(1.5, abs=1e-15)
    assert c.frame_operator_deviation == pytest.approx(hs_norm(frame_operator(mercedes_benz()) - 1.5 * np.eye(2)))

    c = certify(E1E1E2)
    assert not c.is_tight and not c.is_orthonormal_set
    assert c.frame_operator_deviation == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert c.potential == pytest.approx(double_sum_potential(E1E1E2.vectors)) == 5.0


def test_certify_orthonormal_subset():
    c = certify(UnitVectorSystem(np.eye(5)[:3]))
    assert c.is_orthonormal_set and not c.is_tight
    assert c.potential == c.lower_bound == 3


def test_certify_rejects_bad_tol():
    with pytest.raises(ValueError):
        certify(mercedes_benz(), tol=0.0)


@pytest.mark.parametrize(
    "base",
    [mercedes_benz(), UnitVectorSystem(np.eye(3)), UnitVectorSystem(np.vstack([np.eye(4), -np.eye(4)]))],
    ids=["mercedes-benz", "basis", "doubled-basis"],
)
def test_tight_certificate_implies_potential_near_bound(rng, base):
    tol = 1e-3
    n, count = base.dim, base.count
    bound = count**2 / n
    hits = 0
    for noise in np.logspace(-7, -2, 30):
        noisy = UnitVectorSystem.from_rows(base.vectors + noise * rng.standard_normal(base.vectors.shape), 0.1)
        c = certify(noisy, tol)
        if c.is_tight:
            hits += 1
            assert abs(c.potential - bound) <= tol * (2 * math.sqrt(bound) + tol)
    assert hits > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 9), st.integers(0, 2**32 - 1), st.data())
def test_permutation_and_sign_invariance(n, count, seed, data):
    s = UnitVectorSystem.random(n, count, seed)
    perm = data.draw(st.permutations(list(range(count))))
    signs = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=count, max_size=count)))
    t = UnitVectorSystem(signs[:, None] * s.vectors[perm])
    assert frame_potential(t) == pytest.approx(frame_potential(s), abs=1e-12)
    np.testing.assert_allclose(frame_operator(t), frame_operator(s), atol=1e-12)
    g = gram_matrix(s)
    np.testing.assert_allclose(gram_matrix(t), (signs[:, None] * g[np.ix_(perm, perm)]) * signs[None, :], atol=1e-12)
    a, b = certify(s, 1e-8), certify(t, 1e-8)
    assert (a.is_tight, a.is_orthonormal_set) == (b.is_tight, b.is_orthonormal_set)
    assert a.frame_operator_deviation == pytest.approx(b.frame_operator_deviation, abs=1e-12)
