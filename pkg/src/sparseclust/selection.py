"""Joint choice of the cluster count and the sparsity bound for sparse K-means.

Three estimators share one table layout, a list of cells keyed by ``k`` and
``lam``: the two-stage subsampling concordance rule, its single-stage
sum-score variant, and a bivariate gap statistic with permutation
references. Prediction strength lives in :mod:`sparseclust.prediction`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._utils import DegenerateError, as_data_matrix, derive_seed, pmap
from .data import ComembershipAccumulator, comembership
from .kmeans import DEFAULT_RESTARTS
from .prediction import DEFAULT_SPLITS, pick_two_stage, ps_joint_select
from .sparse import INNER_RESTARTS, initial_fit, sparse_kmeans
from .stability import (DEFAULT_B, DEFAULT_F, DEFAULT_RHO, SUBSAMPLE_RESTARTS, TIE_TOL,
                        feature_concordance, make_plan, trimmed_score)

DEFAULT_LAMBDA0 = 1.2
DEFAULT_GRID_M = 28
DEFAULT_GAP_B = 20
MIN_LAMBDA_RATIO = 1e-2
METHODS = ("S4", "GapJoint", "PsJoint", "S4NaiveSum")

# seed tags, kept distinct so the streams never collide
_FULL, _SUB, _REF_DATA, _REF_FIT = 3, 4, 5, 6


@dataclass
class LambdaGrid:
    k: int
    lambdas: np.ndarray
    feature_counts: np.ndarray
    deleted: tuple = ()
    seed: int = 0
    fits: dict = field(default_factory=dict, repr=False)
    raw_lambdas: np.ndarray | None = field(default=None, repr=False)
    raw_counts: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.lambdas)


@dataclass
class SelectionReport:
    method: str
    table: list
    k_hat: int
    lambda_hat: float
    n_selected_at_choice: int
    labels: np.ndarray | None = None
    mask: np.ndarray | None = None
    seed: int = 0
    runtime: float = 0.0
    details: dict = field(default_factory=dict, repr=False)

    def cell(self, k, lam):
        for c in self.table:
            if c["k"] == k and abs(c["lam"] - lam) <= 1e-12 * max(1.0, abs(lam)):
                return c
        raise KeyError((k, lam))


def _full_fit(X, k, lam, init, restarts, inner_restarts, seed):
    return sparse_kmeans(X, k, lam, restarts, inner_restarts, derive_seed(seed, _FULL, k),
                         init_fit=init)


def _full_init(X, k, restarts, seed):
    return initial_fit(X, k, restarts, derive_seed(seed, _FULL, k))


def build_lambda_grid(X, k, m=DEFAULT_GRID_M, lambda0=DEFAULT_LAMBDA0, seed=0,
                      restarts=DEFAULT_RESTARTS, inner_restarts=INNER_RESTARTS, monotone=True):
    """Lambda values whose selected-feature counts are roughly even on a log scale.

    Starting from ``{lambda0, sqrt(p)}``, ``m`` geometric midpoints are
    inserted one at a time, each into the interval with the largest jump in
    log feature count (the first such interval on ties). Intervals whose
    endpoints are within a relative 1e-2 of each other are not split again.
    Points selecting every feature are then removed.

    Fits at small lambda can land on different partitions, so counts are
    not always monotone in lambda. With ``monotone=True`` the grid keeps the
    longest non-decreasing run of counts that starts at ``lambda0``; the
    unfiltered sequence stays in ``raw_lambdas`` and ``raw_counts``.
    """
    X = as_data_matrix(X)
    p = X.shape[1]
    upper = float(np.sqrt(p))
    if int(m) < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 1.0 <= lambda0 < upper:
        raise ValueError(f"lambda0 must lie in [1, sqrt(p)={upper:.4g}), got {lambda0}")
    init = _full_init(X, k, restarts, seed)
    fits = {}

    def count(lam):
        fits[lam] = _full_fit(X, k, lam, init, restarts, inner_restarts, seed)
        return fits[lam].n_selected

    lams = [float(lambda0), upper]
    counts = [count(lams[0]), count(lams[1])]
    for _ in range(int(m)):
        gaps = np.diff(np.log(counts))
        # a count jump across a tiny lambda interval is a discontinuity, not a gap to fill
        ratio = np.array(lams[1:]) / np.array(lams[:-1])
        gaps[ratio < 1.0 + MIN_LAMBDA_RATIO] = -np.inf
        if not np.isfinite(gaps.max()):
            break
        i = int(np.argmax(gaps))
        new = float(np.sqrt(lams[i] * lams[i + 1]))
        lams.insert(i + 1, new)
        counts.insert(i + 1, count(new))
    lams = np.array(lams)
    counts = np.array(counts)
    keep = counts < p
    if not keep.any():
        raise DegenerateError("every grid point selects all features; lower lambda0")
    if monotone:
        idx = np.flatnonzero(keep)
        keep[:] = False
        keep[idx[_monotone_run(counts[idx])]] = True
    deleted = tuple(float(v) for v in lams[~keep])
    kept_fits = {lam: fits[lam] for lam in lams[keep]}
    return LambdaGrid(k=int(k), lambdas=lams[keep], feature_counts=counts[keep],
                      deleted=deleted, seed=int(seed), fits=kept_fits,
                      raw_lambdas=lams, raw_counts=counts)


def _monotone_run(counts):
    """Indices of the longest non-decreasing subsequence that starts at index 0."""
    n = len(counts)
    best = [1] * n
    nxt = [-1] * n
    for i in range(n - 2, -1, -1):
        for j in range(i + 1, n):
            if counts[j] >= counts[i] and best[j] + 1 > best[i]:
                best[i], nxt[i] = best[j] + 1, j
    out, i = [], 0
    while i != -1:
        out.append(i)
        i = nxt[i]
    return np.array(out)


def build_grids(X, k_values, m=DEFAULT_GRID_M, lambda0=DEFAULT_LAMBDA0, seed=0,
                restarts=DEFAULT_RESTARTS, inner_restarts=INNER_RESTARTS):
    """One :class:`LambdaGrid` per k."""
    return {int(k): build_lambda_grid(X, k, m, lambda0, seed, restarts, inner_restarts)
            for k in k_values}


def _grid_lambdas(grid):
    lams = grid.lambdas if isinstance(grid, LambdaGrid) else grid
    lams = [float(v) for v in lams]
    if not lams:
        raise ValueError("empty lambda grid")
    return lams


def _check_grids(grids):
    if not grids:
        raise ValueError("no grids given")
    return {int(k): _grid_lambdas(g) for k, g in sorted(grids.items())}


def _reuse(grid, lam, seed):
    if isinstance(grid, LambdaGrid) and grid.seed == seed:
        return grid.fits.get(lam)
    return None


def _s4_table(X, grids, f, B, rho, restarts, sub_restarts, inner_restarts, seed, threads):
    n, p = X.shape
    plan = make_plan(n, f, B, seed)
    lam_map = _check_grids(grids)
    cells, fits = [], {}
    for k, lams in lam_map.items():
        init = None

        def sub_init(b, k=k):
            kept = plan.kept_sets[b]
            return initial_fit(X[kept], k, sub_restarts, derive_seed(seed, _SUB, k, b))

        sub_inits = pmap(sub_init, range(plan.B), threads)
        for lam in lams:
            full = _reuse(grids[k], lam, seed)
            if full is None:
                if init is None:
                    init = _full_init(X, k, restarts, seed)
                full = _full_fit(X, k, lam, init, restarts, inner_restarts, seed)

            def sub_fit(b, k=k, lam=lam):
                kept = plan.kept_sets[b]
                return sparse_kmeans(X[kept], k, lam, sub_restarts, inner_restarts,
                                     derive_seed(seed, _SUB, k, b), init_fit=sub_inits[b])

            acc = ComembershipAccumulator(n)
            freq = np.zeros(p)
            for b, sf in enumerate(pmap(sub_fit, range(plan.B), threads)):
                acc.add(sf.labels, plan.kept_sets[b])
                freq += sf.mask
            res = trimmed_score(comembership(full.labels), acc.result(), rho)
            F = feature_concordance(full.mask, freq / plan.B)
            cells.append({"k": k, "lam": lam, "score": res.trimmed_score, "F": F,
                          "score_plus_f": None if F is None else res.trimmed_score + F,
                          "n_selected": full.n_selected})
            fits[(k, lam)] = full
    return cells, fits, plan


def _report(method, cells, fits, k_hat, lam_hat, seed, t0, details):
    fit = fits[(k_hat, lam_hat)]
    return SelectionReport(method=method, table=cells, k_hat=int(k_hat), lambda_hat=float(lam_hat),
                           n_selected_at_choice=fit.n_selected, labels=fit.labels,
                           mask=fit.mask, seed=int(seed), runtime=time.perf_counter() - t0,
                           details=details)


def s4_joint_select(X, grids, f=DEFAULT_F, B=DEFAULT_B, rho=DEFAULT_RHO,
                    restarts=DEFAULT_RESTARTS, sub_restarts=SUBSAMPLE_RESTARTS,
                    inner_restarts=INNER_RESTARTS, seed=0, threads=1):
    """Two-stage concordance choice of ``(k, lam)``.

    ``grids`` maps k to a :class:`LambdaGrid` or a plain list of lambdas.
    Every cell gets the trimmed cluster concordance ``score`` and the
    feature concordance ``F`` (None when all features are selected). The
    k with the best ``score`` anywhere in the table wins (larger k on ties),
    then the lambda on that row maximizing ``score + F`` (smaller on ties).
    """
    t0 = time.perf_counter()
    X = as_data_matrix(X)
    cells, fits, plan = _s4_table(X, grids, f, B, rho, restarts, sub_restarts,
                                  inner_restarts, seed, threads)
    k_hat, lam_hat = pick_two_stage(cells, "score", "score_plus_f")
    return _report("S4", cells, fits, k_hat, lam_hat, seed, t0, {"plan": plan, "fits": fits})


def pick_sum(cells, key="score_plus_f"):
    """Single-stage argmax of ``key`` over all cells; larger k, then smaller lambda, on ties."""
    usable = [c for c in cells if c[key] is not None and not np.isnan(c[key])]
    if not usable:
        raise ValueError(f"no cell has a defined {key!r} score")
    top = max(c[key] for c in usable)
    best = [c for c in usable if c[key] >= top - TIE_TOL]
    k_hat = max(c["k"] for c in best)
    lam_hat = min(c["lam"] for c in best if c["k"] == k_hat)
    return k_hat, lam_hat


def s4_naive_sum_select(X, grids, f=DEFAULT_F, B=DEFAULT_B, rho=DEFAULT_RHO,
                        restarts=DEFAULT_RESTARTS, sub_restarts=SUBSAMPLE_RESTARTS,
                        inner_restarts=INNER_RESTARTS, seed=0, threads=1):
    """Maximize ``score + F`` jointly over all cells in one step.

    Kept for comparison: the feature term can pull k away from the value
    the cluster concordance alone supports.
    """
    t0 = time.perf_counter()
    X = as_data_matrix(X)
    cells, fits, plan = _s4_table(X, grids, f, B, rho, restarts, sub_restarts,
                                  inner_restarts, seed, threads)
    k_hat, lam_hat = pick_sum(cells)
    return _report("S4NaiveSum", cells, fits, k_hat, lam_hat, seed, t0,
                   {"plan": plan, "fits": fits})


def permute_columns(X, rng):
    """Each column shuffled independently: keeps the marginals, breaks the clusters."""
    return rng.permuted(X, axis=0)


def sparse_objective(fit):
    """Weighted between-cluster dispersion in pairwise form (twice the centroid form)."""
    return 2.0 * fit.objective


def gap_joint_select(X, grids, B=DEFAULT_GAP_B, restarts=DEFAULT_RESTARTS,
                     inner_restarts=INNER_RESTARTS, seed=0, threads=1):
    """Bivariate gap statistic with column-permutation references.

    ``gap = log O - mean_b log O^(b)``. The best cell fixes ``k``; lambda is
    then the smallest value on that row whose gap is within one standard
    deviation of the best, the deviation taken over the ``B`` reference
    values of ``log O`` at the best cell.
    """
    if B < 10:
        raise ValueError(f"B must be >= 10, got {B}")
    t0 = time.perf_counter()
    X = as_data_matrix(X)
    lam_map = _check_grids(grids)
    refs = [permute_columns(X, np.random.default_rng(derive_seed(seed, _REF_DATA, b)))
            for b in range(B)]
    cells, fits = [], {}
    for k, lams in lam_map.items():
        init = None

        def ref_init(b, k=k):
            return initial_fit(refs[b], k, restarts, derive_seed(seed, _REF_FIT, k, b))

        ref_inits = pmap(ref_init, range(B), threads)
        for lam in lams:
            full = _reuse(grids[k], lam, seed)
            if full is None:
                if init is None:
                    init = _full_init(X, k, restarts, seed)
                full = _full_fit(X, k, lam, init, restarts, inner_restarts, seed)

            def ref_obj(b, k=k, lam=lam):
                rf = sparse_kmeans(refs[b], k, lam, restarts, inner_restarts,
                                   derive_seed(seed, _REF_FIT, k, b), init_fit=ref_inits[b])
                return sparse_objective(rf)

            O = sparse_objective(full)
            Ob = np.array(pmap(ref_obj, range(B), threads))
            if O <= 0 or np.any(Ob <= 0):
                raise DegenerateError(f"nonpositive objective at k={k}, lambda={lam:.4g}")
            logs = np.log(Ob)
            cells.append({"k": k, "lam": lam, "gap": float(np.log(O) - logs.mean()),
                          "sd": float(logs.std()), "objective": float(O),
                          "n_selected": full.n_selected})
            fits[(k, lam)] = full
    gaps = np.array([c["gap"] for c in cells])
    best = cells[int(np.argmax(gaps))]
    k_hat = best["k"]
    bar = best["gap"] - best["sd"]
    lam_hat = min(c["lam"] for c in cells if c["k"] == k_hat and c["gap"] >= bar)
    return _report("GapJoint", cells, fits, k_hat, lam_hat, seed, t0,
                   {"best": (best["k"], best["lam"]), "fits": fits})


def ps_joint_report(X, grids, n_splits=DEFAULT_SPLITS, restarts=DEFAULT_RESTARTS,
                    inner_restarts=INNER_RESTARTS, seed=0, threads=1):
    """:func:`sparseclust.prediction.ps_joint_select` wrapped as a :class:`SelectionReport`."""
    t0 = time.perf_counter()
    X = as_data_matrix(X)
    lam_map = _check_grids(grids)
    res = ps_joint_select(X, lam_map, n_splits, restarts, inner_restarts, seed, threads)
    k_hat, lam_hat = res.chosen
    full = _reuse(grids[k_hat], lam_hat, seed)
    if full is None:
        full = _full_fit(X, k_hat, lam_hat, None, restarts, inner_restarts, seed)
    return _report("PsJoint", res.table, {(k_hat, lam_hat): full}, k_hat, lam_hat, seed, t0, {})


@dataclass(frozen=True)
class SelectionConfig:
    k_min: int = 2
    k_max: int = 7
    f: float = DEFAULT_F
    B: int = DEFAULT_B
    rho: float = DEFAULT_RHO
    restarts: int = DEFAULT_RESTARTS
    sub_restarts: int = SUBSAMPLE_RESTARTS
    inner_restarts: int = INNER_RESTARTS
    n_splits: int = DEFAULT_SPLITS
    lambda0: float = DEFAULT_LAMBDA0
    grid_m: int = DEFAULT_GRID_M
    seed: int = 0
    threads: int = 1

    def validate(self, n=None):
        def bad(name, why):
            raise ValueError(f"invalid config field {name!r}: {why}")

        if self.k_min < 2:
            bad("k_min", "must be >= 2")
        if self.k_max < self.k_min:
            bad("k_max", "must be >= k_min")
        if n is not None and self.k_max >= n:
            bad("k_max", f"must be below n={n}")
        if not 0.0 < self.f < 1.0:
            bad("f", f"must lie in (0, 1), got {self.f}")
        if self.B < 1:
            bad("B", "must be >= 1")
        if not 0.0 <= self.rho < 50.0:
            bad("rho", f"must lie in [0, 50), got {self.rho}")
        for name in ("restarts", "sub_restarts", "inner_restarts", "grid_m"):
            if getattr(self, name) < 1:
                bad(name, "must be >= 1")
        if self.n_splits < 2:
            bad("n_splits", "must be >= 2")
        if self.lambda0 < 1.0:
            bad("lambda0", "must be >= 1")
        if self.threads < 0:
            bad("threads", "must be >= 0")
        return self


def estimate(method, X, config=None, grids=None, **overrides):
    """Run one joint estimator by name with a validated configuration.

    ``method`` is one of ``S4``, ``GapJoint``, ``PsJoint`` or ``S4NaiveSum``.
    Grids are built from the config unless passed in.
    """
    t0 = time.perf_counter()
    if config is None:
        config = SelectionConfig(**overrides)
    elif overrides:
        config = SelectionConfig(**{**config.__dict__, **overrides})
    X = as_data_matrix(X)
    config.validate(X.shape[0])
    c = config
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if grids is None:
        grids = build_grids(X, range(c.k_min, c.k_max + 1), c.grid_m, c.lambda0, c.seed,
                            c.restarts, c.inner_restarts)
    if method == "S4":
        rep = s4_joint_select(X, grids, c.f, c.B, c.rho, c.restarts, c.sub_restarts,
                              c.inner_restarts, c.seed, c.threads)
    elif method == "S4NaiveSum":
        rep = s4_naive_sum_select(X, grids, c.f, c.B, c.rho, c.restarts, c.sub_restarts,
                                  c.inner_restarts, c.seed, c.threads)
    elif method == "GapJoint":
        rep = gap_joint_select(X, grids, c.B, c.restarts, c.inner_restarts, c.seed, c.threads)
    else:
        rep = ps_joint_report(X, grids, c.n_splits, c.restarts, c.inner_restarts, c.seed,
                              c.threads)
    rep.runtime = time.perf_counter() - t0
    rep.details["config"] = config
    return rep
