"""Subsampling concordance scores and the plain K-means S4 estimator.

A subject's concordance is a Youden-type score (sensitivity + specificity - 1)
of the mean subsample co-membership against the full-data co-membership.
The trimmed score drops the least stable subjects one at a time,
recomputing all scores after each drop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._utils import as_data_matrix, derive_seed, pmap
from .data import ComembershipAccumulator, ComembershipView, MeanComembership, comembership
from .kmeans import DEFAULT_RESTARTS, kmeans

SUBSAMPLE_RESTARTS = 10
DEFAULT_F = 0.7
DEFAULT_B = 100
DEFAULT_RHO = 5.0
DEFAULT_S0 = 0.8
TIE_TOL = 1e-12


@dataclass(frozen=True)
class SubsamplePlan:
    n: int
    f: float
    B: int
    kept_sets: tuple
    seed: int

    @property
    def size(self):
        return int(np.floor(self.f * self.n))


@dataclass(frozen=True)
class ConcordanceResult:
    per_subject: np.ndarray
    trimmed_score: float
    dropped: tuple
    rho: float
    isolated: tuple = ()


def make_plan(n, f=DEFAULT_F, B=DEFAULT_B, seed=0):
    """``B`` without-replacement subsamples of size ``floor(f n)``, sorted indices."""
    if not 0.0 < f < 1.0:
        raise ValueError(f"f must lie in (0, 1), got {f}")
    m = int(np.floor(f * n))
    if m < 2:
        raise ValueError(f"subsample size floor(f*n)={m} is below 2")
    if B < 1:
        raise ValueError("B must be >= 1")
    rng = np.random.default_rng(derive_seed(seed, 15485863))
    kept = tuple(np.sort(rng.choice(n, size=m, replace=False)) for _ in range(B))
    return SubsamplePlan(n=int(n), f=float(f), B=int(B), kept_sets=kept, seed=int(seed))


def _as_same(T):
    if isinstance(T, ComembershipView):
        if not T.observed[~np.eye(T.n, dtype=bool)].all():
            raise ValueError("full-data co-membership must have no missing off-diagonal cells")
        return T.same
    return np.asarray(T, dtype=bool)


def _as_mean(Tbar):
    if isinstance(Tbar, MeanComembership):
        return Tbar.means
    return np.asarray(Tbar, dtype=np.float64)


def _scores(same, means):
    """Vectorized per-subject concordance; returns (scores, isolated mask)."""
    n = same.shape[0]
    obs = ~np.isnan(means)
    np.fill_diagonal(obs, False)
    m = np.where(obs, means, 0.0)
    pos = same & obs
    neg = ~same & obs
    n_pos = pos.sum(axis=1)
    n_neg = neg.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sens = np.where(n_pos > 0, (m * pos).sum(axis=1) / n_pos, 1.0)
        spec = np.where(n_neg > 0, ((1.0 - m) * neg).sum(axis=1) / n_neg, 1.0)
    isolated = (n_pos + n_neg) == 0
    s = np.where(isolated, 0.0, sens + spec - 1.0)
    return s, isolated


def subject_scores(T, Tbar):
    """Concordance ``S_i`` for every subject.

    A sensitivity or specificity term whose denominator is empty counts as
    1; a subject with no observed pair at all scores 0.
    """
    same = _as_same(T)
    means = _as_mean(Tbar)
    if same.shape != means.shape:
        raise ValueError("T and Tbar dimensions differ")
    return _scores(same, means)[0]


def trimmed_score(T, Tbar, rho=DEFAULT_RHO):
    """Iteratively drop ``floor(rho n / 100)`` lowest-scoring subjects.

    After each drop the remaining subjects are rescored on the reduced
    matrices; ties for the lowest score drop the smallest index.
    """
    if not 0.0 <= rho < 50.0:
        raise ValueError(f"rho must lie in [0, 50), got {rho}")
    same = _as_same(T)
    means = _as_mean(Tbar)
    n = same.shape[0]
    n_drop = int(np.floor(rho * n / 100.0 + 1e-9))
    alive = np.arange(n)
    initial, isolated = _scores(same, means)
    scores = initial
    dropped = []
    for _ in range(n_drop):
        worst = int(np.argmin(scores))
        dropped.append(int(alive[worst]))
        alive = np.delete(alive, worst)
        ix = np.ix_(alive, alive)
        scores, _ = _scores(same[ix], means[ix])
    return ConcordanceResult(per_subject=initial, trimmed_score=float(scores.mean()),
                             dropped=tuple(dropped), rho=float(rho),
                             isolated=tuple(np.flatnonzero(isolated).tolist()))


def feature_concordance(full_mask, sub_freq):
    """Youden-type agreement between a full-data feature selection and subsample frequencies.

    Returns ``None`` when every feature is selected (specificity undefined).
    """
    f = np.asarray(full_mask, dtype=bool)
    q = np.asarray(sub_freq, dtype=np.float64)
    if f.shape != q.shape:
        raise ValueError("mask and frequency vectors differ in length")
    if not f.any():
        raise ValueError("full-data fit selected no feature")
    if f.all():
        return None
    return float(q[f].mean() + (1.0 - q[~f]).mean() - 1.0)


def pick_larger_k(ks, scores):
    """Index of the maximal score, preferring the larger k among ties."""
    scores = np.asarray(scores, dtype=np.float64)
    best = np.nanmax(scores)
    idx = [i for i, s in enumerate(scores) if s >= best - TIE_TOL]
    return max(idx, key=lambda i: ks[i])


@dataclass
class S4Result:
    k_hat: int
    k_values: list
    scores: list
    s_max: float
    rho: float
    s0: float
    details: dict = field(default_factory=dict, repr=False)

    def rescore(self, rho=None, s0=None):
        """Re-derive the estimate for another trimming level or threshold without refitting."""
        rho = self.rho if rho is None else rho
        s0 = self.s0 if s0 is None else s0
        mats = self.details["matrices"]
        scores = [trimmed_score(T, Tbar, rho).trimmed_score for T, Tbar in mats]
        return _s4_decide(self.k_values, scores, rho, s0, self.details)


def _s4_decide(ks, scores, rho, s0, details):
    s_max = float(np.max(scores))
    k_hat = 1 if s_max < s0 else ks[pick_larger_k(ks, scores)]
    return S4Result(k_hat=k_hat, k_values=list(ks), scores=[float(s) for s in scores],
                    s_max=s_max, rho=float(rho), s0=float(s0), details=details)


def cluster_concordance(X, k, plan, restarts=DEFAULT_RESTARTS,
                        sub_restarts=SUBSAMPLE_RESTARTS, seed=0, threads=1):
    """Full-data co-membership and mean subsample co-membership for one k."""
    X = as_data_matrix(X)
    full = kmeans(X, k, restarts=restarts, seed=derive_seed(seed, 1, k))

    def fit_sub(b):
        kept = plan.kept_sets[b]
        return kmeans(X[kept], k, restarts=sub_restarts, seed=derive_seed(seed, 2, k, b)).labels

    acc = ComembershipAccumulator(X.shape[0])
    for b, labels in enumerate(pmap(fit_sub, range(plan.B), threads)):
        acc.add(labels, plan.kept_sets[b])
    return comembership(full.labels), acc.result(), full


def s4_estimate_k(X, k_min=2, k_max=10, f=DEFAULT_F, B=DEFAULT_B, rho=DEFAULT_RHO,
                  s0=DEFAULT_S0, restarts=DEFAULT_RESTARTS, sub_restarts=SUBSAMPLE_RESTARTS,
                  seed=0, threads=1):
    """Estimate K for K-means by subsampling concordance.

    For each k in ``k_min..k_max`` (with ``k_min >= 2``) the trimmed score
    ``S*_rho(k)`` is computed from one shared subsample plan. If no score
    reaches ``s0`` the estimate is 1; otherwise the maximizing k, the larger
    one among ties.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    k_min = max(int(k_min), 2)
    if k_max < k_min or k_max >= n:
        raise ValueError(f"need 2 <= k_min <= k_max < n={n}")
    plan = make_plan(n, f, B, seed)
    ks = list(range(k_min, int(k_max) + 1))
    matrices, scores, results = [], [], []
    for k in ks:
        T, Tbar, _ = cluster_concordance(X, k, plan, restarts, sub_restarts, seed, threads)
        res = trimmed_score(T, Tbar, rho)
        matrices.append((T, Tbar))
        results.append(res)
        scores.append(res.trimmed_score)
    return _s4_decide(ks, scores, rho, s0, {"matrices": matrices, "concordance": results,
                                            "plan": plan})
