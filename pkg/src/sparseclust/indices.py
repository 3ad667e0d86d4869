"""Classical cluster-number criteria built on K-means dispersion.

Every selector returns an :class:`IndexCurve`. Ties in an argmax go to the
smallest ``k``. CH, KL, H and silhouette have no way to detect ``k = 1``
and never return it; the gap and jump statistics may.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._utils import as_data_matrix, derive_seed, pmap
from .data import tss_per_feature
from .kmeans import DEFAULT_RESTARTS, kmeans

METHODS = ("ch", "kl", "h", "silhouette", "gap-unif", "gap-pca", "jump")


@dataclass
class IndexCurve:
    method: str
    k_values: list
    scores: list
    chosen_k: int
    extras: dict = field(default_factory=dict)


def _argmax_first(values):
    values = np.asarray(values, dtype=np.float64)
    return int(np.flatnonzero(values == np.nanmax(values))[0])


def _range(k_min, k_max, n):
    if not 1 <= k_min <= k_max <= n:
        raise ValueError(f"need 1 <= k_min <= k_max <= n={n}, got [{k_min}, {k_max}]")
    return list(range(int(k_min), int(k_max) + 1))


def wcss_curve(X, k_min, k_max, restarts=DEFAULT_RESTARTS, seed=0, return_labels=False):
    """Total within-cluster dispersion ``W_k`` of the best-of-restarts fit for each k."""
    X = as_data_matrix(X)
    ks = _range(k_min, k_max, X.shape[0])
    fits = [kmeans(X, k, restarts=restarts, seed=derive_seed(seed, k)) for k in ks]
    W = np.array([f.wcss_weighted for f in fits])
    if return_labels:
        return ks, W, [f.labels for f in fits]
    return ks, W


def _candidates(k_min, k_max, lo, hi, n):
    ks = list(range(max(int(k_min), lo), min(int(k_max), hi) + 1))
    if not ks:
        raise ValueError(f"no admissible k in [{k_min}, {k_max}] for this index with n={n}")
    return ks


def ch_select(X, k_min=2, k_max=10, restarts=DEFAULT_RESTARTS, seed=0):
    """Calinski-Harabasz: maximize ``(BCSS/(k-1)) / (WCSS/(n-k))``."""
    X = as_data_matrix(X)
    n = X.shape[0]
    ks = _candidates(k_min, k_max, 2, n - 1, n)
    _, W = wcss_curve(X, ks[0], ks[-1], restarts, seed)
    tss = tss_per_feature(X).sum()
    k_arr = np.array(ks, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = ((tss - W) / (k_arr - 1)) / (W / (n - k_arr))
    scores = np.where(W == 0, np.inf, scores)
    return IndexCurve("ch", ks, scores.tolist(), ks[_argmax_first(scores)], {"W": W.tolist()})


def kl_select(X, k_min=2, k_max=10, restarts=DEFAULT_RESTARTS, seed=0):
    """Krzanowski-Lai: maximize ``|DIFF(k) / DIFF(k+1)|``.

    ``DIFF(k) = (k-1)^(2/p) W_{k-1} - k^(2/p) W_k``; a zero ``DIFF(k+1)``
    scores ``+inf``.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    ks = _candidates(k_min, k_max, 2, n - 2, n)
    kw, W = wcss_curve(X, ks[0] - 1, ks[-1] + 1, restarts, seed)
    Wd = dict(zip(kw, W))

    def diff(k):
        return (k - 1) ** (2.0 / p) * Wd[k - 1] - k ** (2.0 / p) * Wd[k]

    scores = []
    for k in ks:
        num, den = diff(k), diff(k + 1)
        scores.append(np.inf if den == 0 else abs(num / den))
    return IndexCurve("kl", ks, scores, ks[_argmax_first(scores)],
                      {"W": W.tolist(), "diff": [diff(k) for k in ks]})


def _hartigan(w_k, w_next, n, k):
    if w_next == 0:
        return 0.0 if w_k == 0 else np.inf
    return (w_k / w_next - 1.0) * (n - k - 1)


def h_select(X, k_min=1, k_max=10, restarts=DEFAULT_RESTARTS, seed=0, threshold=10.0):
    """Hartigan: smallest ``k >= 2`` with ``H(k) <= 10``, else the largest k.

    ``H(k) = (W_k / W_{k+1} - 1)(n - k - 1)``; the curve includes ``k = 1``
    when requested but ``k = 1`` is never chosen.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    ks = _candidates(k_min, k_max, 1, n - 1, n)
    kw, W = wcss_curve(X, ks[0], ks[-1] + 1, restarts, seed)
    Wd = dict(zip(kw, W))
    scores = [_hartigan(Wd[k], Wd[k + 1], n, k) for k in ks]
    eligible = [k for k, h in zip(ks, scores) if k >= 2 and h <= threshold]
    chosen = eligible[0] if eligible else ks[-1]
    return IndexCurve("h", ks, scores, chosen, {"W": W.tolist()})


def silhouette_values(X, labels, D=None):
    """Per-sample silhouette with Euclidean distance; singletons get 0."""
    if D is None:
        D = squareform(pdist(np.asarray(X, dtype=np.float64)))
    labels = np.asarray(labels)
    uniq, inv = np.unique(labels, return_inverse=True)
    k = len(uniq)
    n = len(labels)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), inv] = 1.0
    sums = D @ onehot
    sizes = onehot.sum(axis=0)
    own = sizes[inv]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[np.arange(n), inv] / (own - 1)
        other = sums / sizes
    other[np.arange(n), inv] = np.inf
    b = other.min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (b - a) / np.maximum(a, b)
    s = np.where(own <= 1, 0.0, s)
    return np.nan_to_num(s, nan=0.0)


def silhouette_select(X, k_min=2, k_max=10, restarts=DEFAULT_RESTARTS, seed=0):
    """Maximize the mean silhouette width."""
    X = as_data_matrix(X)
    n = X.shape[0]
    ks = _candidates(k_min, k_max, 2, n - 1, n)
    _, _, labels = wcss_curve(X, ks[0], ks[-1], restarts, seed, return_labels=True)
    D = squareform(pdist(X))
    scores = [float(silhouette_values(X, lab, D).mean()) for lab in labels]
    return IndexCurve("silhouette", ks, scores, ks[_argmax_first(scores)])


def reference_uniform(X, rng):
    lo, hi = X.min(axis=0), X.max(axis=0)
    return lo + (hi - lo) * rng.random(X.shape)


def reference_pca(X, rng):
    """Uniform draw in the bounding box of the principal-axis rotation of X."""
    mu = X.mean(axis=0)
    Xc = X - mu
    _, _, Vt = np.linalg.svd(Xc, full_matrices=False)
    Z = Xc @ Vt.T
    lo, hi = Z.min(axis=0), Z.max(axis=0)
    Zr = lo + (hi - lo) * rng.random(Z.shape)
    return Zr @ Vt + mu


def gap_select(X, k_min=1, k_max=10, B=50, reference="pca", restarts=DEFAULT_RESTARTS,
               seed=0, one_se=False, threads=1):
    """Gap statistic ``mean_b log W_k^(b) - log W_k``.

    ``reference`` is ``"uniform"`` (feature-wise box) or ``"pca"`` (box in the
    principal-axis frame). The default picks the maximizing k; ``one_se=True``
    instead returns the smallest k with ``gap(k) >= gap(k+1) - s_{k+1}``.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    X = as_data_matrix(X)
    n = X.shape[0]
    ks = _candidates(k_min, k_max, 1, n - 1, n)
    draw = {"uniform": reference_uniform, "unif": reference_uniform,
            "pca": reference_pca}.get(reference)
    if draw is None:
        raise ValueError(f"unknown reference {reference!r}")
    _, W = wcss_curve(X, ks[0], ks[-1], restarts, seed)

    def ref_logs(b):
        rng = np.random.default_rng(derive_seed(seed, 7919, b))
        Xb = draw(X, rng)
        _, Wb = wcss_curve(Xb, ks[0], ks[-1], restarts, derive_seed(seed, 104729, b))
        return np.log(Wb)

    logs = np.array(pmap(ref_logs, range(B), threads))
    with np.errstate(divide="ignore"):
        gap = logs.mean(axis=0) - np.log(W)
    sd = logs.std(axis=0)
    se = sd * np.sqrt(1.0 + 1.0 / B)
    if one_se:
        chosen = ks[-1]
        for i in range(len(ks) - 1):
            if gap[i] >= gap[i + 1] - se[i + 1]:
                chosen = ks[i]
                break
    else:
        chosen = ks[_argmax_first(gap)]
    name = "gap-pca" if reference == "pca" else "gap-unif"
    return IndexCurve(name, ks, gap.tolist(), chosen,
                      {"W": W.tolist(), "se": se.tolist(), "ref_mean_log": logs.mean(axis=0).tolist()})


def jump_select(X, k_min=1, k_max=10, y=None, restarts=DEFAULT_RESTARTS, seed=0, W=None):
    """Jump statistic ``W_k^y - W_{k-1}^y`` with ``y = -p/2`` and a zero baseline before k=1.

    ``W`` may be passed directly (aligned with ``k_min..k_max``), in which case
    ``X`` only supplies ``p``.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    y = -p / 2.0 if y is None else float(y)
    if W is None:
        ks, W = wcss_curve(X, k_min, k_max, restarts, seed)
        if k_min > 1:
            _, Wprev = wcss_curve(X, k_min - 1, k_min - 1, restarts, seed)
            W = np.concatenate([Wprev, W])
    else:
        ks = list(range(int(k_min), int(k_max) + 1))
        W = np.asarray(W, dtype=np.float64)
        if k_min > 1:
            raise ValueError("explicit W must start at k=1")
    if np.any(W <= 0):
        raise ValueError("jump statistic needs positive W_k; lower k_max")
    transformed = W ** y
    base = np.concatenate([[0.0], transformed[:-1]]) if k_min == 1 else transformed[:-1]
    jumps = transformed[-len(ks):] - base[-len(ks):]
    return IndexCurve("jump", ks, jumps.tolist(), ks[_argmax_first(jumps)], {"W": W.tolist(), "y": y})


def select(method, X, k_min=1, k_max=10, **kwargs):
    method = method.lower()
    if method == "ch":
        return ch_select(X, max(k_min, 2), k_max, **kwargs)
    if method == "kl":
        return kl_select(X, max(k_min, 2), k_max, **kwargs)
    if method == "h":
        return h_select(X, k_min, k_max, **kwargs)
    if method in ("sil", "silhouette"):
        return silhouette_select(X, max(k_min, 2), k_max, **kwargs)
    if method in ("gap-unif", "gap-uniform"):
        return gap_select(X, k_min, k_max, reference="uniform", **kwargs)
    if method == "gap-pca":
        return gap_select(X, k_min, k_max, reference="pca", **kwargs)
    if method == "jump":
        return jump_select(X, k_min, k_max, **kwargs)
    raise ValueError(f"unknown index {method!r}; choose from {METHODS}")
