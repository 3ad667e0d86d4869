"""Co-membership views and per-feature sums of squares.

Data matrices are plain ``(n, p)`` float arrays and partitions are integer
label vectors; the helpers here are shared by every estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._utils import as_labels


@dataclass(frozen=True)
class ComembershipView:
    """Tri-state pairwise co-clustering matrix.

    ``same[i, j]`` is meaningful only where ``observed[i, j]`` is True; a cell
    touching a subject left out of a subsample is unobserved (missing).
    """

    same: np.ndarray
    observed: np.ndarray

    @property
    def n(self):
        return self.same.shape[0]

    def cell(self, i, j):
        """1, 0, or None for a missing cell."""
        if not self.observed[i, j]:
            return None
        return int(self.same[i, j])


@dataclass(frozen=True)
class MeanComembership:
    """Element-wise average of co-membership views over their observed cells.

    ``means`` is NaN exactly where ``counts`` is zero.
    """

    means: np.ndarray
    counts: np.ndarray

    @property
    def n(self):
        return self.means.shape[0]

    @property
    def missing(self):
        return self.counts == 0


def canonical_labels(labels):
    """Relabel so cluster ids appear in order of first occurrence (0, 1, ...)."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv.ravel()].astype(np.intp)


def comembership(labels):
    labels = as_labels(labels)
    same = labels[:, None] == labels[None, :]
    return ComembershipView(same=same, observed=np.ones_like(same, dtype=bool))


def restricted_comembership(labels, kept, n):
    """Co-membership of a subsample fit embedded in the full ``n x n`` frame."""
    kept = np.asarray(kept, dtype=np.intp)
    labels = as_labels(labels, len(kept))
    if kept.size and (kept.min() < 0 or kept.max() >= n):
        raise IndexError(f"kept indices must lie in [0, {n})")
    if np.unique(kept).size != kept.size:
        raise ValueError("kept indices must be distinct")
    same = np.zeros((n, n), dtype=bool)
    observed = np.zeros((n, n), dtype=bool)
    ix = np.ix_(kept, kept)
    same[ix] = labels[:, None] == labels[None, :]
    observed[ix] = True
    return ComembershipView(same=same, observed=observed)


class ComembershipAccumulator:
    """Running sums behind :func:`mean_comembership` without storing every view."""

    def __init__(self, n):
        self.n = n
        self.sums = np.zeros((n, n))
        self.counts = np.zeros((n, n), dtype=np.int64)

    def add(self, labels, kept=None):
        labels = as_labels(labels)
        if kept is None:
            self.sums += labels[:, None] == labels[None, :]
            self.counts += 1
            return
        ix = np.ix_(np.asarray(kept, dtype=np.intp), np.asarray(kept, dtype=np.intp))
        self.sums[ix] += labels[:, None] == labels[None, :]
        self.counts[ix] += 1

    def add_view(self, view):
        if view.n != self.n:
            raise ValueError(f"view dimension {view.n} != {self.n}")
        self.sums += view.same & view.observed
        self.counts += view.observed

    def result(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            means = np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.nan)
        return MeanComembership(means=means, counts=self.counts.copy())


def mean_comembership(views):
    views = list(views)
    if not views:
        raise ValueError("need at least one view")
    acc = ComembershipAccumulator(views[0].n)
    for v in views:
        acc.add_view(v)
    return acc.result()


def _cluster_means(X, labels, k):
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    onehot = np.zeros((k, labels.shape[0]))
    onehot[labels, np.arange(labels.shape[0])] = 1.0
    sums = onehot @ X
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts[:, None], counts


def wcss_per_feature(X, labels):
    """Centroid-form within-cluster sum of squares for each feature.

    The pairwise form ``sum_k (1/n_k) sum_{i1,i2 in C_k} d`` over ordered pairs
    is exactly twice this value.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = canonical_labels(as_labels(labels, X.shape[0]))
    k = int(labels.max()) + 1
    means, _ = _cluster_means(X, labels, k)
    resid = X - means[labels]
    return np.einsum("ij,ij->j", resid, resid)


def tss_per_feature(X):
    X = np.asarray(X, dtype=np.float64)
    resid = X - X.mean(axis=0)
    return np.einsum("ij,ij->j", resid, resid)


def bcss_per_feature(X, labels):
    """Between-cluster sum of squares per feature, ``TSS - WCSS`` clipped at 0."""
    return np.maximum(tss_per_feature(X) - wcss_per_feature(X, labels), 0.0)
