"""Seeded simulation designs with known cluster and feature truth.

Every generator is a pure function of its parameters and ``seed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_REJECTIONS = 1000


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    truth: np.ndarray | None
    design_id: str
    seed: int
    true_features: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    @property
    def true_k(self):
        return 1 if self.truth is None else int(np.unique(self.truth).size)


@dataclass(frozen=True)
class GeneModuleParams:
    n_modules: int = 10
    module_size_mean: float = 20.0
    sigma1_sq: float = 0.2
    sigma2_sq: float = 1.0
    n_noise: int = 600
    phi_cov: float = 0.3
    effect: tuple = (2.0, 2.5)
    wishart_df: int = 60
    cluster_size_means: tuple = (40.0, 30.0, 20.0)

    def __post_init__(self):
        if not 0.0 < self.phi_cov < 1.0:
            raise ValueError("phi_cov must lie in (0, 1)")
        lo, hi = self.effect
        if lo > hi:
            raise ValueError("effect lower bound exceeds upper bound")
        if lo > 6.0:
            raise ValueError("effect lower bound above 6 cannot be met by U(4, 10) templates")


def _blobs(rng, centers, sizes, sd=1.0):
    centers = np.asarray(centers, dtype=np.float64)
    X = np.concatenate([c + sd * rng.standard_normal((m, centers.shape[1]))
                        for c, m in zip(centers, sizes)])
    y = np.repeat(np.arange(len(sizes)), sizes)
    return X, y


def _min_between_cluster_distance(X, y):
    best = np.inf
    for a in range(y.max() + 1):
        for b in range(a + 1, y.max() + 1):
            d = ((X[y == a][:, None, :] - X[y == b][None, :, :]) ** 2).sum(axis=2)
            best = min(best, float(np.sqrt(d.min())))
    return best


def _random_centers(rng, k, p, var):
    for _ in range(MAX_REJECTIONS):
        centers = rng.normal(0.0, np.sqrt(var), size=(k, p))
        sizes = rng.choice([25, 50], size=k)
        X, y = _blobs(rng, centers, sizes)
        if _min_between_cluster_distance(X, y) >= 1.0:
            return X, y
    raise RuntimeError(f"no admissible draw after {MAX_REJECTIONS} attempts")


def _diagonal(rng, shift):
    t = np.linspace(-0.5, 0.5, 100)
    first = t[:, None] + 0.1 * rng.standard_normal((100, 3))
    second = t[:, None] + 0.1 * rng.standard_normal((100, 3)) + np.asarray(shift)
    return np.vstack([first, second]), np.repeat([0, 1], 100)


def generate_setting(setting, seed=0):
    """The ten low-dimensional designs (1 null, 2-5 well separated, 6-10 overlapping)."""
    rng = np.random.default_rng(seed)
    s = int(setting)
    if s == 1:
        return LabeledDataset(rng.random((200, 10)), None, "setting1", seed)
    if s == 2:
        X, y = _blobs(rng, [(0, 0), (0, 5), (5, 3)], [25, 25, 50])
    elif s == 3:
        X, y = _random_centers(rng, 4, 3, 5.0)
    elif s == 4:
        X, y = _random_centers(rng, 4, 10, 1.9)
    elif s == 5:
        X, y = _diagonal(rng, [10, 10, 10])
    elif s in (6, 7, 8):
        d = {6: 2.5, 7: 3.0, 8: 3.5}[s]
        X, y = _blobs(rng, [(0, 0), (0, d), (d, 0), (d, d)], [25] * 4)
    elif s == 9:
        X, y = _diagonal(rng, [1, 1, 1])
    elif s == 10:
        X, y = _diagonal(rng, [1, 0, 0])
    else:
        raise ValueError(f"setting must be 1..10, got {setting}")
    return LabeledDataset(X, y, f"setting{s}", seed)


def generate_highdim_independent(q=50, u=0.8, seed=0, n_per=33, p=1000):
    """Three clusters of ``n_per``; first ``q`` features have means (+u, 0, -u)."""
    if not 0 < q < p:
        raise ValueError(f"q must lie in (0, {p})")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3 * n_per, p))
    X[:n_per, :q] += u
    X[2 * n_per:, :q] -= u
    y = np.repeat([0, 1, 2], n_per)
    mask = np.zeros(p, dtype=bool)
    mask[:q] = True
    return LabeledDataset(X, y, "hd-indep", seed, mask, {"q": q, "u": u})


def generate_s1_design(seed=0, n_per=33):
    """Three clusters where clusters 2 and 3 differ only on features 51-150."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3 * n_per, 300))
    means = [(3.0, 0.6), (-1.0, 0.0), (-1.0, -1.5)]
    for c, (m1, m2) in enumerate(means):
        rows = slice(c * n_per, (c + 1) * n_per)
        X[rows, :50] += m1
        X[rows, 50:150] += m2
    mask = np.zeros(300, dtype=bool)
    mask[:150] = True
    return LabeledDataset(X, np.repeat([0, 1, 2], n_per), "s1", seed, mask)


def sample_inverse_wishart(scale, df, rng):
    """Inverse-Wishart draw with scale matrix ``scale`` and ``df`` degrees of freedom.

    Draws ``W ~ Wishart(scale^-1, df)`` through the Bartlett factorization
    and returns ``W^-1``; the mean is ``scale / (df - d - 1)``.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    scale = np.atleast_2d(np.asarray(scale, dtype=np.float64))
    d = scale.shape[0]
    if scale.shape != (d, d) or not np.allclose(scale, scale.T):
        raise ValueError("scale must be a symmetric square matrix")
    if df <= d - 1:
        raise ValueError(f"df must exceed dim - 1 = {d - 1}")
    try:
        L = np.linalg.cholesky(np.linalg.inv(scale))
    except np.linalg.LinAlgError as exc:
        raise ValueError("scale matrix is not positive definite") from exc
    A = np.zeros((d, d))
    A[np.diag_indices(d)] = np.sqrt(rng.chisquare(df - np.arange(d)))
    low = np.tril_indices(d, -1)
    A[low] = rng.standard_normal(len(low[0]))
    LA = L @ A
    W = LA @ LA.T
    inv = np.linalg.inv(W)
    return 0.5 * (inv + inv.T)


def _positive_poisson(rng, mean, upper=None):
    while True:
        v = int(rng.poisson(mean))
        if v > 0 and (upper is None or v < upper):
            return v


def generate_gene_modules(params=None, seed=0, max_template_tries=100_000):
    """Three subtypes with correlated gene modules plus independent noise genes."""
    params = GeneModuleParams() if params is None else params
    rng = np.random.default_rng(seed)
    sizes = [_positive_poisson(rng, m) for m in params.cluster_size_means]
    n = sum(sizes)
    y = np.repeat(np.arange(3), sizes)
    module_sizes = [_positive_poisson(rng, params.module_size_mean, upper=params.wishart_df)
                    for _ in range(params.n_modules)]
    lo, hi = params.effect
    blocks = []
    for nm in module_sizes:
        for _ in range(max_template_tries):
            u = rng.uniform(4.0, 10.0, size=3)
            if lo <= u.max() - u.min() <= hi:
                break
        else:
            raise RuntimeError("could not satisfy the template effect-size constraint")
        phi = (1 - params.phi_cov) * np.eye(nm) + params.phi_cov * np.ones((nm, nm))
        block = np.empty((n, nm))
        for k in range(3):
            S = sample_inverse_wishart(phi, params.wishart_df, rng)
            sd = np.sqrt(np.diag(S))
            corr = S / np.outer(sd, sd)
            np.fill_diagonal(corr, 1.0)
            rows = np.flatnonzero(y == k)
            centers = rng.normal(u[k], np.sqrt(params.sigma1_sq), size=len(rows))
            chol = np.linalg.cholesky(corr)
            block[rows] = centers[:, None] + rng.standard_normal((len(rows), nm)) @ chol.T
        blocks.append(block)
    ug = rng.uniform(4.0, 10.0, size=params.n_noise)
    noise = ug + np.sqrt(params.sigma2_sq) * rng.standard_normal((n, params.n_noise))
    X = np.hstack(blocks + [noise])
    mask = np.zeros(X.shape[1], dtype=bool)
    mask[:sum(module_sizes)] = True
    return LabeledDataset(X, y, "gene-module", seed, mask,
                          {"module_sizes": module_sizes, "cluster_sizes": sizes})


DESIGNS = tuple(f"setting{i}" for i in range(1, 11)) + ("hd-indep", "gene-module", "s1")


def generate(design, seed=0, **params):
    """Dispatch on a design name from :data:`DESIGNS`."""
    if design.startswith("setting"):
        return generate_setting(int(design[len("setting"):]), seed)
    if design == "hd-indep":
        return generate_highdim_independent(seed=seed, **params)
    if design == "gene-module":
        if "effect" in params and not isinstance(params["effect"], tuple):
            params["effect"] = tuple(params["effect"])
        return generate_gene_modules(GeneModuleParams(**params), seed)
    if design == "s1":
        return generate_s1_design(seed)
    raise ValueError(f"unknown design {design!r}; choose from {DESIGNS}")
