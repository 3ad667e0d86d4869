import numpy as np
import pytest

from sparseclust.simgen import (DESIGNS, GeneModuleParams, generate, generate_gene_modules,
                                generate_highdim_independent, generate_s1_design,
                                generate_setting, sample_inverse_wishart)

SIZES = {1: (200, 10), 2: (100, 2), 5: (200, 3), 6: (100, 2), 9: (200, 3), 10: (200, 3)}


@pytest.mark.parametrize("s", range(1, 11))
def test_settings_shapes_and_determinism(s):
    a, b = generate_setting(s, 4), generate_setting(s, 4)
    assert np.array_equal(a.X, b.X)
    if s in SIZES:
        assert a.X.shape == SIZES[s]
    if s == 1:
        assert a.truth is None and a.true_k == 1
        assert a.X.min() >= 0 and a.X.max() <= 1
    else:
        assert a.truth.shape[0] == a.X.shape[0]


def test_setting2_sizes():
    assert np.bincount(generate_setting(2, 0).truth).tolist() == [25, 25, 50]


def test_settings_3_4_sizes_and_separation():
    for s in (3, 4):
        for seed in range(10):
            d = generate_setting(s, seed)
            assert d.true_k == 4
            assert set(np.bincount(d.truth).tolist()) <= {25, 50}
            X, y = d.X, d.truth
            dmin = min(np.sqrt(((X[y == a][:, None] - X[y == b][None]) ** 2).sum(-1)).min()
                       for a in range(4) for b in range(a + 1, 4))
            assert dmin >= 1.0


def test_setting5_elongated():
    d = generate_setting(5, 0)
    Z = d.X[d.truth == 0]
    c = np.corrcoef(Z.T)[np.triu_indices(3, 1)]
    # population value: var(t) / (var(t) + 0.01) with t equally spaced on [-0.5, 0.5]
    t = np.linspace(-0.5, 0.5, 100)
    assert np.allclose(c, t.var() / (t.var() + 0.01), atol=0.05)


def test_highdim_design():
    d = generate_highdim_independent(50, 0.8, seed=1)
    assert d.X.shape == (99, 1000) and d.true_features.sum() == 50
    gap = d.X[:33, 0].mean() - d.X[66:, 0].mean()
    assert abs(gap - 1.6) < 0.5
    z = generate_highdim_independent(50, 0.0, seed=1)
    assert abs(z.X[:, 0].mean()) < 4 / np.sqrt(99)
    with pytest.raises(ValueError):
        generate_highdim_independent(0)


def test_s1_design():
    d = generate_s1_design(3)
    assert d.X.shape == (99, 300) and d.true_features.sum() == 150
    assert abs(d.X[:33, 0].mean() - 3) < 0.6
    assert abs(d.X[:, 150:].mean()) < 0.3
    c2, c3 = d.X[33:66], d.X[66:]
    assert abs(c2[:, 50:150].mean() - c3[:, 50:150].mean() - 1.5) < 0.2
    assert abs(c2[:, :50].mean() - c3[:, :50].mean()) < 0.2


def test_inverse_wishart_scalar_mean():
    rng = np.random.default_rng(0)
    c, df = 2.0, 12
    draws = [sample_inverse_wishart([[c]], df, rng)[0, 0] for _ in range(10_000)]
    assert np.mean(draws) == pytest.approx(c / (df - 2), rel=0.05)


def test_inverse_wishart_pd_and_concentration():
    rng = np.random.default_rng(1)
    for _ in range(100):
        S = sample_inverse_wishart(np.eye(4) + 0.3, 20, rng)
        np.linalg.cholesky(S)
        assert np.allclose(S, S.T)
    d, df = 5, 500
    draws = [sample_inverse_wishart(np.eye(d), df, rng) * (df - d - 1) for _ in range(50)]
    radius = [np.max(np.abs(np.linalg.eigvalsh(S - np.eye(d)))) for S in draws]
    assert np.median(radius) < 0.2
    assert np.max(np.abs(np.linalg.eigvalsh(np.mean(draws, axis=0) - np.eye(d)))) < 0.05


def test_inverse_wishart_errors():
    with pytest.raises(ValueError):
        sample_inverse_wishart([[1.0, 2.0], [2.0, 1.0]], 10, 0)
    with pytest.raises(ValueError):
        sample_inverse_wishart(np.eye(3), 1, 0)


def test_gene_modules():
    d = generate_gene_modules(seed=2)
    nfeat = d.true_features.sum()
    assert 120 <= nfeat <= 280
    assert nfeat == sum(d.params["module_sizes"])
    assert d.X.shape == (sum(d.params["cluster_sizes"]), nfeat + 600)
    assert np.array_equal(d.X, generate_gene_modules(seed=2).X)


def module_correlation(phi, seed):
    d = generate_gene_modules(GeneModuleParams(phi_cov=phi), seed)
    m = d.params["module_sizes"][0]
    Z = d.X[d.truth == 0][:, :m]
    c = np.corrcoef(Z.T)
    return c[np.triu_indices(m, 1)].mean()


def test_phi_orders_within_module_correlation():
    hi = [module_correlation(0.5, s) for s in range(10)]
    lo = [module_correlation(0.1, s) for s in range(10)]
    assert np.mean(hi) > np.mean(lo)


def test_gene_module_params_validation():
    with pytest.raises(ValueError):
        GeneModuleParams(phi_cov=1.5)
    with pytest.raises(ValueError):
        GeneModuleParams(effect=(3.0, 2.0))


def test_dispatch():
    for name in DESIGNS:
        assert generate(name, 0).design_id == name
    with pytest.raises(ValueError):
        generate("setting11")
    with pytest.raises(ValueError):
        generate("blobs")
