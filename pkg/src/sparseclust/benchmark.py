"""Replicated simulation runs summarized per method and design."""

from __future__ import annotations

import time

import numpy as np

from ._utils import derive_seed
from .indices import select
from .kmeans import kmeans
from .metrics import ari, jaccard
from .prediction import ps_select_k
from .selection import SelectionConfig, estimate
from .simgen import generate
from .stability import s4_estimate_k

PLAIN_METHODS = ("s4", "ps", "ch", "kl", "h", "sil", "gap-unif", "gap-pca", "jump")
JOINT_ALIASES = {"s4-joint": "S4", "gap-joint": "GapJoint", "ps-joint": "PsJoint",
                 "s4-naive": "S4NaiveSum"}


def estimate_plain_k(method, X, k_min=1, k_max=10, B=100, f=0.7, rho=5.0, s0=0.8,
                     restarts=20, n_splits=5, seed=0, threads=1):
    """K estimate from one plain (non-sparse) method; returns ``(k_hat, payload)``."""
    method = method.lower()
    if method == "s4":
        r = s4_estimate_k(X, max(k_min, 2), k_max, f=f, B=B, rho=rho, s0=s0,
                          restarts=restarts, seed=seed, threads=threads)
        return r.k_hat, {"k_values": r.k_values, "scores": r.scores, "s_max": r.s_max}
    if method == "ps":
        r = ps_select_k(X, k_min, k_max, n_splits=n_splits, restarts=restarts, seed=seed,
                        threads=threads)
        return r.chosen, {"table": r.table}
    kwargs = {"restarts": restarts, "seed": seed}
    if method.startswith("gap"):
        kwargs.update(B=B, threads=threads)
    curve = select(method, X, k_min, k_max, **kwargs)
    return curve.chosen_k, {"k_values": curve.k_values, "scores": curve.scores}


def _labels_for(X, k, seed):
    if k == 1:
        return np.zeros(X.shape[0], dtype=np.intp)
    return kmeans(X, k, seed=seed).labels


def _summary(values):
    v = np.asarray([x for x in values if x is not None and not np.isnan(x)], dtype=np.float64)
    if v.size == 0:
        return None, None
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


def run_benchmark(designs, methods, replicates=20, seed=0, B=50, design_params=None,
                  k_min=None, k_max=None, grid_m=28, threads=1, progress=None):
    """One summary row per (method, design).

    Rows carry the fraction of replicates with the true K, the RMSE of K,
    mean/sd ARI of the partition at the estimate and, for the joint methods,
    mean/sd Jaccard of the selected features and the mean number selected.
    """
    design_params = design_params or {}
    rows = []
    for design in designs:
        data = [generate(design, derive_seed(seed, 101, r), **design_params)
                for r in range(replicates)]
        for method in methods:
            t0 = time.perf_counter()
            ks, aris, jacs, nsel = [], [], [], []
            for r, d in enumerate(data):
                ms = derive_seed(seed, 102, r)
                if method in JOINT_ALIASES:
                    cfg = SelectionConfig(k_min=k_min or 2, k_max=k_max or 7, B=B,
                                          grid_m=grid_m, seed=ms, threads=threads)
                    rep = estimate(JOINT_ALIASES[method], d.X, cfg)
                    k_hat, labels = rep.k_hat, rep.labels
                    nsel.append(rep.n_selected_at_choice)
                    if d.true_features is not None:
                        jacs.append(jaccard(rep.mask, d.true_features))
                elif method in PLAIN_METHODS:
                    lo = 1 if k_min is None else k_min
                    k_hat, _ = estimate_plain_k(method, d.X, lo, k_max or 10, B=B, seed=ms,
                                                threads=threads)
                    labels = _labels_for(d.X, k_hat, ms)
                else:
                    raise ValueError(f"unknown method {method!r}")
                ks.append(k_hat)
                aris.append(ari(labels, d.truth) if d.truth is not None else np.nan)
                if progress is not None:
                    progress(design, method, r, k_hat)
            true_k = data[0].true_k
            ks_arr = np.array(ks, dtype=np.float64)
            a_mean, a_sd = _summary(aris)
            j_mean, j_sd = _summary(jacs)
            rows.append({
                "method": method, "design": design, "replicates": replicates, "true_k": true_k,
                "frac_correct_k": float(np.mean(ks_arr == true_k)),
                "rmse_k": float(np.sqrt(np.mean((ks_arr - true_k) ** 2))),
                "mean_k": float(ks_arr.mean()),
                "ari_mean": a_mean, "ari_sd": a_sd, "jaccard_mean": j_mean, "jaccard_sd": j_sd,
                "n_selected_mean": float(np.mean(nsel)) if nsel else None,
                "seconds": time.perf_counter() - t0,
                "k_hats": ks,
            })
    return rows


BENCH_COLUMNS = ["method", "design", "replicates", "true_k", "frac_correct_k", "rmse_k",
                 "mean_k", "ari_mean", "ari_sd", "jaccard_mean", "jaccard_sd",
                 "n_selected_mean", "seconds"]

ALL_METHODS = PLAIN_METHODS + tuple(JOINT_ALIASES)
