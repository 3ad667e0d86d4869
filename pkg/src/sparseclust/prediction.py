"""Prediction strength for K-means and its sparse K-means extension."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._utils import as_data_matrix, derive_seed, pmap
from .kmeans import DEFAULT_RESTARTS, assign, kmeans
from .sparse import INNER_RESTARTS, initial_fit, sparse_kmeans
from .stability import TIE_TOL

DEFAULT_SPLITS = 5
PS_THRESHOLD = 0.8


@dataclass
class PsResult:
    chosen: object
    table: list = field(default_factory=list)


def _split(n, rng):
    perm = rng.permutation(n)
    half = n // 2
    return np.sort(perm[:half]), np.sort(perm[half:])


def ps_from_labels(test_labels, predicted):
    """Minimum over test clusters of the co-assignment rate of ordered test pairs.

    Test clusters with fewer than two members are skipped; returns NaN if all are.
    """
    test_labels = np.asarray(test_labels)
    predicted = np.asarray(predicted)
    rates = []
    for c in np.unique(test_labels):
        members = predicted[test_labels == c]
        m = members.size
        if m < 2:
            continue
        counts = np.bincount(members)
        rates.append(float((counts * (counts - 1)).sum()) / (m * (m - 1)))
    return min(rates) if rates else float("nan")


def _mean_se(values):
    v = np.asarray(values, dtype=np.float64)
    v = v[~np.isnan(v)]
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def prediction_strength(X, k, n_splits=DEFAULT_SPLITS, restarts=DEFAULT_RESTARTS, seed=0,
                        threads=1):
    """Mean and standard error of prediction strength over random half splits."""
    X = as_data_matrix(X)
    n = X.shape[0]
    if k < 2:
        raise ValueError("prediction strength needs k >= 2")
    if n // 2 < k:
        raise ValueError(f"each half has {n // 2} samples, fewer than k={k}")

    def one(s):
        rng = np.random.default_rng(derive_seed(seed, 31, s))
        tr, te = _split(n, rng)
        train = kmeans(X[tr], k, restarts=restarts, seed=derive_seed(seed, 32, k, s))
        test = kmeans(X[te], k, restarts=restarts, seed=derive_seed(seed, 33, k, s))
        return ps_from_labels(test.labels, assign(X[te], train.centroids))

    return _mean_se(pmap(one, range(n_splits), threads))


def ps_select_k(X, k_min=2, k_max=10, n_splits=DEFAULT_SPLITS, restarts=DEFAULT_RESTARTS,
                seed=0, threshold=PS_THRESHOLD, threads=1, rule="argmax"):
    """Choose k by prediction strength over ``k_min..k_max`` (``k >= 2``).

    The answer is 1 when every ``ps + se`` is below ``threshold``. Otherwise
    ``rule="argmax"`` takes the maximizing k (smaller on ties) and
    ``rule="cutoff"`` the largest k with ``ps >= threshold``, falling back to
    the argmax when no ps reaches it.
    """
    if rule not in ("argmax", "cutoff"):
        raise ValueError(f"rule must be 'argmax' or 'cutoff', got {rule!r}")
    X = as_data_matrix(X)
    ks = list(range(max(int(k_min), 2), int(k_max) + 1))
    if not ks:
        raise ValueError("empty k range")
    table = []
    for k in ks:
        m, se = prediction_strength(X, k, n_splits, restarts, derive_seed(seed, k), threads)
        table.append({"k": k, "ps": m, "se": se})
    ps = np.array([r["ps"] for r in table])
    se = np.array([r["se"] for r in table])
    if np.all(ps + se < threshold):
        chosen = 1
    else:
        chosen = ks[int(np.flatnonzero(ps == np.nanmax(ps))[0])]
        above = [k for k, v in zip(ks, ps) if v >= threshold]
        if rule == "cutoff" and above:
            chosen = max(above)
    return PsResult(chosen=chosen, table=table)


def sparse_ps(X, k, lam, n_splits=DEFAULT_SPLITS, restarts=DEFAULT_RESTARTS,
              inner_restarts=INNER_RESTARTS, seed=0, threads=1, return_splits=False,
              init_cache=None):
    """Sparse prediction strength and feature prediction strength at ``(k, lam)``.

    Test samples go to the training centroids under the training weights.
    ``F_ps`` is the share of test-selected features also selected on the
    training half, ``None`` if the test half selects nothing.
    ``init_cache`` (a dict) lets calls that share a seed reuse the
    uniform-weight first pass across lambda values.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    if n // 2 < k:
        raise ValueError(f"each half has {n // 2} samples, fewer than k={k}")

    def one(s):
        rng = np.random.default_rng(derive_seed(seed, 41, s))
        tr, te = _split(n, rng)
        fits = []
        for tag, rows in ((42, tr), (43, te)):
            sd = derive_seed(seed, tag, k, s)
            init = None
            if init_cache is not None:
                key = (sd, k)
                if key not in init_cache:
                    init_cache[key] = initial_fit(X[rows], k, restarts, sd)
                init = init_cache[key]
            fits.append(sparse_kmeans(X[rows], k, lam, restarts, inner_restarts, sd,
                                      init_fit=init))
        train, test = fits
        pred = assign(X[te], train.centroids, train.weights.w)
        te_mask = test.mask
        fps = float(train.mask[te_mask].mean()) if te_mask.any() else np.nan
        return ps_from_labels(test.labels, pred), fps

    out = pmap(one, range(n_splits), threads)
    ps, se = _mean_se([o[0] for o in out])
    fvals = np.array([o[1] for o in out])
    fps = None if np.all(np.isnan(fvals)) else float(np.nanmean(fvals))
    if return_splits:
        return ps, se, fps, out
    return ps, se, fps


def pick_two_stage(cells, first, second):
    """Two-stage argmax over ``cells`` (dicts with ``k`` and ``lam``).

    Stage one maximizes ``first`` over all cells, larger k on ties. Stage
    two maximizes ``second`` along that k's row, smaller lambda on ties;
    cells where ``second`` is None are skipped.
    """
    if not cells:
        raise ValueError("empty grid")
    vals = np.array([c[first] for c in cells], dtype=np.float64)
    best = np.nanmax(vals)
    k_hat = max(c["k"] for c, v in zip(cells, vals) if v >= best - TIE_TOL)
    row = [c for c in cells if c["k"] == k_hat and c[second] is not None
           and not np.isnan(c[second])]
    if not row:
        raise ValueError(f"no cell on the k={k_hat} row has a defined {second!r} score")
    top = max(c[second] for c in row)
    lam_hat = min(c["lam"] for c in row if c[second] >= top - TIE_TOL)
    return k_hat, lam_hat


def ps_joint_select(X, grids, n_splits=DEFAULT_SPLITS, restarts=DEFAULT_RESTARTS,
                    inner_restarts=INNER_RESTARTS, seed=0, threads=1):
    """Joint (K, lambda) by prediction strength: K from max ps, lambda from max ps + F_ps.

    ``grids`` maps each k to its lambda values (e.g. from
    :func:`sparseclust.selection.build_lambda_grid`).
    """
    X = as_data_matrix(X)
    cells = []
    cache = {}
    for k in sorted(grids):
        for lam in grids[k]:
            ps, se, fps = sparse_ps(X, k, lam, n_splits, restarts, inner_restarts,
                                    derive_seed(seed, k), threads, init_cache=cache)
            total = None if fps is None else ps + fps
            cells.append({"k": int(k), "lam": float(lam), "ps": ps, "se": se, "f_ps": fps,
                          "ps_plus_fps": total})
    k_hat, lam_hat = pick_two_stage(cells, "ps", "ps_plus_fps")
    return PsResult(chosen=(k_hat, lam_hat), table=cells)
