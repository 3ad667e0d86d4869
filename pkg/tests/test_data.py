import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseclust.data import (ComembershipAccumulator, canonical_labels, comembership,
                              mean_comembership, restricted_comembership, bcss_per_feature,
                              tss_per_feature, wcss_per_feature)
from sparseclust.simgen import generate_setting


def test_comembership_cells():
    v = comembership([0, 0, 1])
    assert v.cell(0, 1) == 1 and v.cell(0, 2) == 0 and v.cell(1, 2) == 0
    off = ~np.eye(3, dtype=bool)
    assert not comembership([0, 1, 2]).same[off].any()
    assert comembership([0, 0, 0]).same[off].all()
    assert comembership([0, 1, 2]).observed.all()


def test_comembership_relabel_invariant():
    a = comembership([0, 0, 1, 2, 2])
    b = comembership([5, 5, 3, 9, 9])
    assert np.array_equal(a.same, b.same)


def test_restricted_comembership():
    v = restricted_comembership([0, 0], [0, 1], 3)
    assert v.cell(0, 1) == 1
    assert v.cell(0, 2) is None and v.cell(1, 2) is None
    full = restricted_comembership([0, 1, 1], [0, 1, 2], 3)
    assert np.array_equal(full.same, comembership([0, 1, 1]).same)
    assert full.observed.all()
    v = restricted_comembership([0, 1], [0, 2], 4)
    assert v.cell(0, 2) == 0
    observed_off = v.observed & ~np.eye(4, dtype=bool)
    assert observed_off.sum() == 2
    with pytest.raises(IndexError):
        restricted_comembership([0, 0], [0, 5], 3)
    with pytest.raises(ValueError):
        restricted_comembership([0, 0], [1, 1], 3)


def test_mean_comembership_cases():
    v1 = restricted_comembership([0, 0], [0, 1], 3)
    v2 = restricted_comembership([0, 1], [0, 1], 3)
    m = mean_comembership([v1, v2])
    assert m.means[0, 1] == 0.5 and m.counts[0, 1] == 2
    v3 = restricted_comembership([0, 0], [0, 2], 3)
    v4 = restricted_comembership([0, 0], [0, 1], 3)
    m = mean_comembership([v3, v4])
    assert m.means[0, 2] == 1.0 and m.counts[0, 2] == 1
    m = mean_comembership([v4, v4])
    assert np.isnan(m.means[1, 2]) and m.missing[1, 2]
    with pytest.raises(ValueError):
        mean_comembership([v1, comembership([0, 1])])


def test_mean_of_identical_views_reproduces_view():
    v = comembership([0, 1, 1, 0, 2])
    m = mean_comembership([v] * 7)
    assert np.array_equal(m.means, v.same.astype(float))


def test_accumulator_matches_view_average():
    rng = np.random.default_rng(3)
    acc = ComembershipAccumulator(12)
    views = []
    for _ in range(20):
        kept = np.sort(rng.choice(12, 8, replace=False))
        lab = rng.integers(0, 3, 8)
        acc.add(lab, kept)
        views.append(restricted_comembership(lab, kept, 12))
    a, b = acc.result(), mean_comembership(views)
    assert np.array_equal(a.counts, b.counts)
    assert np.allclose(a.means, b.means, equal_nan=True)
    assert np.array_equal(a.means, a.means.T, equal_nan=True)


def test_canonical_labels():
    assert canonical_labels([7, 7, 2, 9, 2]).tolist() == [0, 0, 1, 2, 1]


def test_wcss_small_cases():
    assert wcss_per_feature(np.array([[0.0], [2.0]]), [0, 0])[0] == 2.0
    X = np.random.default_rng(0).normal(size=(5, 3))
    assert np.all(wcss_per_feature(X, np.arange(5)) == 0)


def test_bcss_small_cases():
    X = np.array([[-1.0], [-1.0], [1.0], [1.0]])
    assert tss_per_feature(X)[0] == 4.0
    assert wcss_per_feature(X, [0, 0, 1, 1])[0] == 0.0
    assert bcss_per_feature(X, [0, 0, 1, 1])[0] == 4.0
    X = np.random.default_rng(1).normal(size=(9, 4))
    assert np.allclose(bcss_per_feature(X, np.zeros(9, int)), 0.0, atol=1e-12)


def pairwise_wcss(X, labels):
    # (1/n_k) * sum over ordered pairs in cluster k of squared differences
    out = np.zeros(X.shape[1])
    for c in np.unique(labels):
        Z = X[labels == c]
        d = (Z[:, None, :] - Z[None, :, :]) ** 2
        out += d.sum(axis=(0, 1)) / Z.shape[0]
    return out


def test_centroid_form_is_half_pairwise_form():
    d = generate_setting(2, seed=4)
    centroid = wcss_per_feature(d.X, d.truth)
    assert np.allclose(2 * centroid, pairwise_wcss(d.X, d.truth), rtol=1e-9, atol=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**31))
def test_tss_identity(n, p, k, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p)) * rng.uniform(0.1, 100)
    labels = rng.integers(0, k, n)
    tss = tss_per_feature(X)
    w = wcss_per_feature(X, labels)
    b = bcss_per_feature(X, labels)
    assert np.all(b >= 0)
    assert np.allclose(w + b, tss, rtol=1e-9, atol=1e-9 * max(1.0, tss.max()))
    assert np.allclose(2 * w, pairwise_wcss(X, labels), rtol=1e-9, atol=1e-9 * max(1.0, tss.max()))
