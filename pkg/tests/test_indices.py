import numpy as np
import pytest
from sklearn.metrics import calinski_harabasz_score, silhouette_samples

from sparseclust import indices as I
from sparseclust.simgen import generate_setting


def two_blobs(seed=0, n=30):
    rng = np.random.default_rng(seed)
    return np.vstack([rng.normal(-100, 1, (n, 2)), rng.normal(100, 1, (n, 2))])


def test_wcss_curve_non_increasing():
    X = generate_setting(2, 0).X
    ks, W = I.wcss_curve(X, 1, 10)
    assert ks == list(range(1, 11))
    assert np.all(np.diff(W) <= 1e-9 * W[0])
    assert I.wcss_curve(X[:6], 6, 6)[1][0] == pytest.approx(0.0, abs=1e-20)


def test_ch_matches_sklearn():
    X = generate_setting(3, 1).X
    ks, _, labels = I.wcss_curve(X, 2, 6, return_labels=True)
    curve = I.ch_select(X, 2, 6)
    for s, lab in zip(curve.scores, labels):
        assert s == pytest.approx(calinski_harabasz_score(X, lab), rel=1e-9)


def test_silhouette_matches_sklearn():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 3))
    for k in (2, 3, 5):
        lab = rng.integers(0, k, 40)
        lab[0] = k  # a singleton cluster
        assert np.allclose(I.silhouette_values(X, lab), silhouette_samples(X, lab), atol=1e-12)


def test_silhouette_conventions():
    X = np.array([[0.0], [0.0], [5.0], [5.0]])
    assert np.all(I.silhouette_values(X, [0, 0, 1, 1]) == 1.0)
    assert np.all(I.silhouette_values(np.array([[0.0], [3.0]]), [0, 1]) == 0.0)


@pytest.mark.parametrize("method", ["ch", "kl", "silhouette", "gap-pca", "jump"])
def test_two_far_blobs(method):
    kw = {"B": 10} if method.startswith("gap") else {}
    assert I.select(method, two_blobs(), 1, 6, **kw).chosen_k == 2


def test_kl_differences_formula():
    X = generate_setting(2, 3).X
    p = X.shape[1]
    c = I.kl_select(X, 2, 6)
    W = dict(zip(range(1, 8), c.extras["W"]))
    for k, d in zip(c.k_values, c.extras["diff"]):
        assert d == pytest.approx((k - 1) ** (2 / p) * W[k - 1] - k ** (2 / p) * W[k])
    # the exponent 2/p vanishes for very wide data
    assert abs(1e6 ** (2 / 1e6) - 1) < 1e-4


def test_hartigan_rules():
    assert I._hartigan(0.0, 0.0, 10, 2) == 0.0
    assert I._hartigan(1.0, 0.0, 10, 2) == np.inf
    assert I._hartigan(2.0, 1.0, 10, 2) == pytest.approx(7.0)
    # 12 tight groups on a line: H stays large up to k_max, so k_max is returned
    rng = np.random.default_rng(0)
    X = np.repeat(np.arange(12.0)[:, None] * 50, 10, axis=0) + rng.normal(size=(120, 1))
    assert I.h_select(X, 1, 5).chosen_k == 5


def test_jump_arithmetic():
    c = I.jump_select(np.zeros((5, 2)), 1, 3, y=-1, W=[10.0, 5.0, 4.0])
    assert np.allclose(c.scores, [0.1, 0.1, 0.05])
    assert c.chosen_k == 1


def test_gap_self_reference_is_near_zero():
    for s in range(3):
        X = np.random.default_rng(s).uniform(size=(200, 3))
        g = I.gap_select(X, 1, 6, B=100, reference="uniform", seed=s)
        assert np.all(np.abs(g.scores) < 0.1)


def test_gap_one_se_rule():
    g = I.gap_select(two_blobs(), 1, 5, B=10, one_se=True)
    assert g.chosen_k == 2
    with pytest.raises(ValueError):
        I.gap_select(two_blobs(), 1, 5, B=10, reference="box")


def test_scale_invariance_of_choice():
    X = generate_setting(2, 7).X
    for m in ("ch", "silhouette", "jump"):
        assert I.select(m, X, 1, 8).chosen_k == I.select(m, 1000.0 * X, 1, 8).chosen_k


def test_bad_ranges():
    with pytest.raises(ValueError):
        I.ch_select(np.zeros((5, 2)) + np.arange(5)[:, None], 5, 9)
    with pytest.raises(ValueError):
        I.select("elbow", two_blobs(), 1, 3)


def rate(method, setting, truth, reps=100, **kw):
    hits = 0
    for s in range(reps):
        hits += I.select(method, generate_setting(setting, s).X, 1, 10, seed=s, **kw).chosen_k == truth
    return hits


def test_ch_setting2_rate():
    assert rate("ch", 2, 3) >= 95


def test_kl_setting2_rate():
    assert rate("kl", 2, 3) >= 50


def test_jump_setting2_rate():
    assert rate("jump", 2, 3) >= 95


def test_silhouette_setting9_rate():
    assert rate("silhouette", 9, 2) >= 95


def test_gap_pca_setting2_rate():
    assert rate("gap-pca", 2, 3, reps=20, B=50) >= 19
