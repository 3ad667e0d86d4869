"""Agreement measures used to score estimates against a known truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalSummary:
    ari_mean: float
    ari_sd: float
    jaccard_mean: float
    jaccard_sd: float
    rmse_k: float
    n_replicates: int


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2.0


def contingency(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"partitions differ in length: {a.shape[0]} vs {b.shape[0]}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia.ravel(), ib.ravel()), 1)
    return table


def ari(a, b):
    """Hubert-Arabie adjusted Rand index.

    Returns 1 when the expected-index correction leaves a zero denominator
    (e.g. both partitions are a single cluster).
    """
    table = contingency(a, b)
    n = table.sum()
    sum_ij = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / _comb2(n)
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


def jaccard(a, b):
    """``|A & B| / |A | B|`` for two boolean feature masks."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("masks differ in length")
    union = np.count_nonzero(a | b)
    if union == 0:
        raise ValueError("both feature sets are empty")
    return np.count_nonzero(a & b) / union


def rmse_k(estimates, true_k):
    est = np.asarray(list(estimates), dtype=np.float64)
    if est.size == 0:
        raise ValueError("no estimates")
    return float(np.sqrt(np.mean((est - true_k) ** 2)))


def summarize(aris, jaccards, k_hats, true_k):
    aris = np.asarray(aris, dtype=np.float64)
    jac = np.asarray(jaccards, dtype=np.float64)
    return EvalSummary(
        ari_mean=float(aris.mean()), ari_sd=float(aris.std(ddof=1)) if aris.size > 1 else 0.0,
        jaccard_mean=float(jac.mean()) if jac.size else float("nan"),
        jaccard_sd=float(jac.std(ddof=1)) if jac.size > 1 else 0.0,
        rmse_k=rmse_k(k_hats, true_k), n_replicates=int(aris.size))
