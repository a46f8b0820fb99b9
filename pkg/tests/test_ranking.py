import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from vascage.errors import EmptyGroup, KTooLarge
from vascage.ranking import group_means, group_variance, rank_features, standardize, top_k


def test_standardize_hand_case():
    Z, mu, sigma, const = standardize(np.array([[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]]))
    assert mu[0] == 4 and sigma[0] == 2
    np.testing.assert_array_equal(Z[:, 0], [-1, 0, 1])
    np.testing.assert_array_equal(Z[:, 1], [0, 0, 0])
    assert list(const) == [False, True]


def test_standardize_moments_and_oracle(rng):
    X = rng.normal(3, 2, size=(50, 10))
    Z, *_ = standardize(X)
    assert np.max(np.abs(Z.mean(axis=0))) < 1e-10
    assert np.max(np.abs(Z.std(axis=0, ddof=1) - 1)) < 1e-10
    np.testing.assert_allclose(Z, oracles.standardize(X.tolist()), rtol=0, atol=1e-12)


def test_group_means_cases(rng):
    Z = rng.normal(size=(6, 3))
    M, groups = group_means(Z, ["a"] * 6)
    np.testing.assert_allclose(M[0], Z.mean(axis=0))
    M, _ = group_means(Z[:2], ["x", "y"], ["x", "y"])
    np.testing.assert_array_equal(M, Z[:2])
    with pytest.raises(EmptyGroup):
        group_means(Z, ["a"] * 6, ["a", "b"])


def test_group_variance_cases(rng):
    np.testing.assert_array_equal(group_variance(np.ones((4, 3))), 0)
    assert group_variance(np.array([[1.0], [1.0 + 3.0]]))[0] == pytest.approx(9 / 2)
    M = rng.normal(size=(5, 7))
    np.testing.assert_allclose(group_variance(M), oracles.group_variance(M.tolist()), atol=1e-12)


def test_top_k_cases():
    assert top_k(np.array([3.0, 1.0, 2.0]), ["a", "b", "c"], 2).top_indices.tolist() == [0, 2]
    assert top_k(np.array([2.0, 2.0, 1.0]), ["a", "b", "c"], 2).top_indices.tolist() == [0, 1]
    r = top_k(np.array([0.0, 5.0, 1.0]), ["a", "b", "c"], 2, constant=np.array([False, True, False]))
    assert r.top_k == ["c", "a"] and r.constant_features == ["b"]
    assert r.order.tolist() == [2, 0, 1]
    with pytest.raises(KTooLarge):
        top_k(np.array([1.0, 2.0]), ["a", "b"], 2, constant=np.array([True, False]))


def test_constructed_signal_is_found(rng):
    n, p = 90, 30
    labels = np.repeat(["g0", "g1", "g2"], 30)
    X = rng.normal(size=(n, p))
    for j, shift in ((4, 3.0), (11, 2.5), (23, 2.0)):
        X[:, j] += np.repeat([0.0, shift, -shift], 30)
    res, _, _ = rank_features(X, labels, [f"f{j}" for j in range(p)], 10)
    assert {"f4", "f11", "f23"} <= set(res.top_k)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-5, 5).filter(lambda a: abs(a) > 0.1), st.floats(-100, 100))
def test_permutation_and_affine_invariance(seed, a, b):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(24, 6))
    labels = np.repeat(["a", "b", "c"], 8)
    names = list("uvwxyz")
    base, _, _ = rank_features(X, labels, names, 3, groups=["a", "b", "c"])
    perm = rng.permutation(24)
    p, _, _ = rank_features(X[perm], labels[perm], names, 3, groups=["a", "b", "c"])
    np.testing.assert_allclose(p.V, base.V, rtol=1e-9, atol=1e-12)
    X2 = X.copy()
    X2[:, 2] = a * X2[:, 2] + b
    q, _, _ = rank_features(X2, labels, names, 3, groups=["a", "b", "c"])
    np.testing.assert_allclose(q.V, base.V, rtol=1e-7, atol=1e-10)
    assert np.all(base.V >= 0)
    assert np.all(np.diff(base.V[base.order]) <= 0)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (12, 4), elements=st.integers(-1000, 1000).map(float)))
def test_standardize_matches_oracle_on_arbitrary_input(X):
    Z, _, _, const = standardize(X)
    ref = np.array(oracles.standardize(X.tolist()))
    np.testing.assert_allclose(Z, ref, rtol=1e-9, atol=1e-9)
    assert np.all(Z[:, const] == 0)
