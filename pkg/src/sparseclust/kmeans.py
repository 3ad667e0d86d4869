"""Weighted Lloyd K-means with k-means++ seeding and multiple restarts.

Feature weights enter as a diagonal metric, ``sum_j w_j (x_ij - c_kj)^2``.
Internally the data are rescaled by ``sqrt(w)`` and zero-weight features are
dropped, so a sparse weight vector makes the fit proportionally cheaper.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._utils import as_data_matrix, derive_seed
from .data import _cluster_means, wcss_per_feature

MAX_ITER = 100
DEFAULT_RESTARTS = 20


@dataclass(frozen=True)
class KMeansFit:
    labels: np.ndarray
    centroids: np.ndarray
    wcss_weighted: float
    iterations: int
    restarts_used: int

    @property
    def k(self):
        return self.centroids.shape[0]


@njit(cache=True, nogil=True)
def _kmeanspp(X, u):
    n, p = X.shape
    k = u.shape[0]
    centers = np.empty((k, p))
    first = min(int(u[0] * n), n - 1)
    centers[0] = X[first]
    d2 = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(p):
            t = X[i, j] - centers[0, j]
            s += t * t
        d2[i] = s
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = min(int(u[c] * n), n - 1)
        else:
            target = u[c] * total
            acc = 0.0
            idx = n - 1
            for i in range(n):
                acc += d2[i]
                if acc > target:
                    idx = i
                    break
        centers[c] = X[idx]
        for i in range(n):
            s = 0.0
            for j in range(p):
                t = X[i, j] - centers[c, j]
                s += t * t
            if s < d2[i]:
                d2[i] = s
    return centers


@njit(cache=True, nogil=True)
def _lloyd(X, centers, max_iter, history):
    """One Lloyd run from ``centers`` (modified in place).

    Writes the within-cluster cost after every iteration into ``history``
    (length >= max_iter) and returns (labels, cost, iterations).
    """
    n, p = X.shape
    k = centers.shape[0]
    labels = np.full(n, -1, dtype=np.intp)
    dist = np.empty(n)
    counts = np.zeros(k, dtype=np.intp)
    it = 0
    while it < max_iter:
        changed = False
        for i in range(n):
            best = -1
            bestd = np.inf
            for c in range(k):
                s = 0.0
                for j in range(p):
                    t = X[i, j] - centers[c, j]
                    s += t * t
                if s < bestd:
                    bestd = s
                    best = c
            dist[i] = bestd
            if labels[i] != best:
                labels[i] = best
                changed = True
        if not changed:
            break
        it += 1
        counts[:] = 0
        for i in range(n):
            counts[labels[i]] += 1
        # empty clusters: move the worst-fit point of a multi-member cluster
        for c in range(k):
            if counts[c] == 0:
                far = -1
                fard = -1.0
                for i in range(n):
                    if counts[labels[i]] > 1 and dist[i] > fard:
                        fard = dist[i]
                        far = i
                counts[labels[far]] -= 1
                labels[far] = c
                counts[c] = 1
                dist[far] = 0.0
        centers[:, :] = 0.0
        for i in range(n):
            for j in range(p):
                centers[labels[i], j] += X[i, j]
        for c in range(k):
            for j in range(p):
                centers[c, j] /= counts[c]
        cost = 0.0
        for i in range(n):
            for j in range(p):
                t = X[i, j] - centers[labels[i], j]
                cost += t * t
        history[it - 1] = cost
    cost = 0.0
    for i in range(n):
        for j in range(p):
            t = X[i, j] - centers[labels[i], j]
            cost += t * t
    return labels, cost, it


@njit(cache=True, nogil=True)
def _multi_restart(X, U, init, max_iter):
    n = X.shape[0]
    R = U.shape[0]
    history = np.empty(max_iter)
    best_labels = np.zeros(n, dtype=np.intp)
    best_cost = np.inf
    best_iter = 0
    runs = 0
    if init.shape[0] > 0:
        labels, cost, it = _lloyd(X, init.copy(), max_iter, history)
        runs += 1
        best_labels, best_cost, best_iter = labels, cost, it
    for r in range(R):
        centers = _kmeanspp(X, U[r])
        labels, cost, it = _lloyd(X, centers, max_iter, history)
        runs += 1
        if cost < best_cost:
            best_labels, best_cost, best_iter = labels, cost, it
    return best_labels, best_cost, best_iter, runs


def _check_weights(weights, p):
    if weights is None:
        return None
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (p,):
        raise ValueError(f"weights must have length {p}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise ValueError("weights are all zero")
    return w


def _scaled(X, w):
    if w is None:
        return np.ascontiguousarray(X), slice(None), None
    active = np.flatnonzero(w > 0)
    root = np.sqrt(w[active])
    return np.ascontiguousarray(X[:, active] * root), active, root


def kmeans(X, k, weights=None, restarts=DEFAULT_RESTARTS, seed=0, init_centroids=None,
           max_iter=MAX_ITER):
    """Best-of-``restarts`` weighted K-means.

    Each restart uses k-means++ seeding drawn from a stream tied to
    ``(seed, restart index)``. If ``init_centroids`` is given, one extra run
    starts from them; it is evaluated first so it wins exact cost ties.

    Returns
    -------
    KMeansFit
        Labels in ``0..k-1`` with no empty cluster, centroids in the original
        feature space and ``sum_j w_j WCSS_j``.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    if restarts < 0 or (restarts == 0 and init_centroids is None):
        raise ValueError("restarts must be >= 1")
    w = _check_weights(weights, p)
    Xs, active, root = _scaled(X, w)
    U = np.random.default_rng(derive_seed(seed, k)).random((int(restarts), k))
    if init_centroids is None:
        init = np.empty((0, Xs.shape[1]))
    else:
        init = np.asarray(init_centroids, dtype=np.float64)
        if init.shape != (k, p):
            raise ValueError(f"init_centroids must have shape ({k}, {p})")
        init = init[:, active] * root if w is not None else init.copy()
        init = np.ascontiguousarray(init)
    labels, _, iters, runs = _multi_restart(Xs, U, init, max_iter)
    labels = np.asarray(labels, dtype=np.intp)
    centroids, _ = _cluster_means(X, labels, k)
    wf = wcss_per_feature(X, labels)
    cost = float(wf.sum() if w is None else w @ wf)
    return KMeansFit(labels=labels, centroids=centroids, wcss_weighted=cost,
                     iterations=int(iters), restarts_used=int(runs))


def lloyd_history(X, centers, weights=None, max_iter=MAX_ITER):
    """Run a single Lloyd pass from ``centers`` and return (labels, per-iteration cost)."""
    X = as_data_matrix(X)
    w = _check_weights(weights, X.shape[1])
    Xs, active, root = _scaled(X, w)
    c = np.asarray(centers, dtype=np.float64)
    c = np.ascontiguousarray(c[:, active] * root if w is not None else c.copy())
    history = np.empty(max_iter)
    labels, _, it = _lloyd(Xs, c, max_iter, history)
    return np.asarray(labels), history[:it].copy()


def assign(X, centroids, weights=None):
    """Nearest-centroid labels under weighted squared Euclidean distance.

    Ties go to the lowest centroid index.
    """
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(centroids, dtype=np.float64)
    if C.ndim != 2 or C.shape[1] != X.shape[1]:
        raise ValueError(f"centroids must have {X.shape[1]} columns")
    w = np.ones(X.shape[1]) if weights is None else _check_weights(weights, X.shape[1])
    d = ((X[:, None, :] - C[None, :, :]) ** 2 * w).sum(axis=2)
    return np.argmin(d, axis=1)
