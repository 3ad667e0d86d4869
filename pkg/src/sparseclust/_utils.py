"""Seed derivation, input validation and the deterministic task map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


class DegenerateError(ValueError):
    """A fit produced no usable signal (e.g. zero between-cluster sum of squares)."""


def derive_seed(seed, *keys):
    """Child seed for the task identified by ``keys``.

    Independent of execution order, so parallel and serial runs agree.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def as_data_matrix(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {X.shape}")
    n, p = X.shape
    if n < 2 or p < 1:
        raise ValueError(f"{name} needs n >= 2 samples and p >= 1 features, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return X


def as_labels(labels, n=None):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be 1-d")
    if n is not None and labels.shape[0] != n:
        raise ValueError(f"expected {n} labels, got {labels.shape[0]}")
    return labels.astype(np.intp, copy=False)


def resolve_threads(threads):
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return int(threads)


def pmap(fn, items, threads=1):
    """``list(map(fn, items))`` on a thread pool; output order always follows ``items``."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
