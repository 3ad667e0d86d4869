"""Sparse K-means: weighted BCSS maximization under L1/L2 weight constraints.

The alternating solver fixes the weights and clusters with weighted K-means,
then fixes the partition and solves the weight subproblem in closed form by
soft-thresholding the per-feature BCSS, with the threshold found by bisection
so that the L1 bound holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._utils import DegenerateError, as_data_matrix, derive_seed
from .data import bcss_per_feature
from .kmeans import DEFAULT_RESTARTS, KMeansFit, kmeans

INNER_RESTARTS = 5
MAX_OUTER = 15
OUTER_TOL = 1e-4
SELECT_EPS = 1e-10


@dataclass(frozen=True)
class WeightVector:
    w: np.ndarray
    lam: float

    @property
    def selected(self):
        return self.w > SELECT_EPS


@dataclass(frozen=True)
class SparseFit:
    labels: np.ndarray
    weights: WeightVector
    objective: float
    outer_iterations: int
    centroids: np.ndarray
    history: tuple = ()

    @property
    def mask(self):
        return self.weights.selected

    @property
    def n_selected(self):
        return int(self.mask.sum())

    @property
    def k(self):
        return self.centroids.shape[0]


def soft_threshold(a, delta):
    """``max(max(a, 0) - delta, 0)`` element-wise."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return np.maximum(np.maximum(np.asarray(a, dtype=np.float64), 0.0) - delta, 0.0)


def _normalized(a, delta):
    s = soft_threshold(a, delta)
    norm = np.sqrt(s @ s)
    if norm == 0.0:
        return s
    return s / norm


def solve_weights(a, lam, rtol=1e-12, max_iter=200):
    """Maximize ``w . a`` subject to ``||w||_2 <= 1``, ``||w||_1 <= lam``, ``w >= 0``.

    The solution is ``S(a, d) / ||S(a, d)||_2`` with ``d = 0`` when that
    already meets the L1 bound, otherwise the ``d`` in ``[0, max(a)]`` at which
    the L1 norm equals ``lam`` (found by bisection; the L1 norm is decreasing
    in ``d``).
    """
    a = np.maximum(np.asarray(a, dtype=np.float64), 0.0)
    if lam < 1.0:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    top = a.max() if a.size else 0.0
    if top <= 0.0:
        raise DegenerateError("all between-cluster sums of squares are zero")
    w = _normalized(a, 0.0)
    if w.sum() <= lam:
        return WeightVector(w=w, lam=float(lam))
    lo, hi = 0.0, top
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        w_mid = _normalized(a, mid)
        l1 = w_mid.sum()
        if l1 == 0.0 or l1 < lam:
            hi = mid
        else:
            lo = mid
        if hi - lo <= rtol * top:
            break
    w = _normalized(a, lo)
    return WeightVector(w=w, lam=float(lam))


def initial_fit(X, k, restarts=DEFAULT_RESTARTS, seed=0):
    """First-pass partition under uniform weights; identical for every lambda."""
    return kmeans(X, k, restarts=restarts, seed=derive_seed(seed, 0))


def sparse_kmeans(X, k, lam, restarts=DEFAULT_RESTARTS, inner_restarts=INNER_RESTARTS,
                  seed=0, init_fit: KMeansFit | None = None, max_outer=MAX_OUTER,
                  tol=OUTER_TOL):
    """Sparse K-means for a fixed ``(k, lam)``.

    Weights start at ``1/sqrt(p)``. Each outer step re-clusters under the
    current weights (also warm-starting from the previous centroids, which
    keeps the objective monotone) and then re-solves the weights. Stops when
    the relative L1 change of the weights drops below ``tol`` or after
    ``max_outer`` steps.

    ``init_fit`` may supply the uniform-weight first pass from
    :func:`initial_fit` so it can be shared across a lambda grid.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    k = int(k)
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    if not 1.0 <= lam <= np.sqrt(p) * (1 + 1e-12):
        raise ValueError(f"lambda must lie in [1, sqrt(p)={np.sqrt(p):.4g}], got {lam}")
    fit = init_fit if init_fit is not None else initial_fit(X, k, restarts, seed)
    w_prev = np.full(p, 1.0 / np.sqrt(p))
    weights = None
    history = []
    it = 0
    for it in range(1, max_outer + 1):
        if it > 1:
            fit = kmeans(X, k, weights=weights.w, restarts=inner_restarts,
                         seed=derive_seed(seed, it), init_centroids=fit.centroids)
        bcss = bcss_per_feature(X, fit.labels)
        weights = solve_weights(bcss, lam)
        history.append(float(weights.w @ bcss))
        change = np.abs(weights.w - w_prev).sum() / np.abs(w_prev).sum()
        w_prev = weights.w
        if change < tol:
            break
    return SparseFit(labels=fit.labels, weights=weights, objective=float(weights.w @ bcss),
                     outer_iterations=it, centroids=fit.centroids, history=tuple(history))


def count_selected(X, k, lam, seed=0, **kwargs):
    return sparse_kmeans(X, k, lam, seed=seed, **kwargs).n_selected
