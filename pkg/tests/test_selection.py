import numpy as np
import pytest

from sparseclust._utils import DegenerateError
from sparseclust.selection import (LambdaGrid, SelectionConfig, build_grids, build_lambda_grid,
                                   estimate, gap_joint_select, permute_columns, pick_sum,
                                   s4_joint_select, s4_naive_sum_select)
from sparseclust.prediction import pick_two_stage
from sparseclust.simgen import generate_highdim_independent


@pytest.fixture(scope="module")
def small():
    # 3 clusters of 15, 10 informative features out of 60
    return generate_highdim_independent(q=10, u=1.5, seed=2, n_per=15, p=60)


def test_single_insertion_grid(small):
    p = small.X.shape[1]
    g = build_lambda_grid(small.X, 3, m=1, lambda0=1.2, monotone=False)
    expect = [1.2, np.sqrt(1.2 * np.sqrt(p)), np.sqrt(p)]
    assert np.allclose(g.raw_lambdas, expect)
    assert np.all(g.feature_counts < p)
    assert set(g.deleted) | set(g.lambdas.tolist()) == set(g.raw_lambdas.tolist())


def test_grid_properties(small):
    p = small.X.shape[1]
    g = build_lambda_grid(small.X, 3, m=12, seed=1)
    c = g.feature_counts
    assert g.lambdas[0] == 1.2 and np.all(np.diff(g.lambdas) > 0)
    assert np.all(np.diff(c) >= 0) and np.all(c < p) and c[0] >= 1
    assert len(g) <= 14
    for lam in g.lambdas:
        assert g.fits[lam].n_selected == c[list(g.lambdas).index(lam)]


def test_grid_validation(small):
    with pytest.raises(ValueError):
        build_lambda_grid(small.X, 3, m=0)
    with pytest.raises(ValueError):
        build_lambda_grid(small.X, 3, lambda0=0.5)
    with pytest.raises(ValueError):
        build_lambda_grid(small.X, 3, lambda0=np.sqrt(60))
    # two identical features: every lambda selects both
    X = np.repeat(np.r_[np.zeros(10), np.ones(10)][:, None], 2, axis=1)
    X = X + 1e-3 * np.arange(20)[:, None]
    with pytest.raises(DegenerateError):
        build_lambda_grid(X, 2, m=2, lambda0=1.0)


def test_monotone_run():
    from sparseclust.selection import _monotone_run
    assert _monotone_run([2, 5, 3, 4, 9]).tolist() == [0, 2, 3, 4]
    assert _monotone_run([4, 1, 5]).tolist() == [0, 2]


def test_single_cell_and_two_stage_independence(small):
    grids = {3: [2.0]}
    rep = s4_joint_select(small.X, grids, B=8, seed=0)
    assert (rep.k_hat, rep.lambda_hat) == (3, 2.0) and len(rep.table) == 1
    # stage one ignores F: rewriting F never moves k
    cells = [{"k": 2, "lam": 1.5, "score": 0.95, "score_plus_f": 1.9},
             {"k": 3, "lam": 1.5, "score": 0.90, "score_plus_f": 1.0},
             {"k": 3, "lam": 2.5, "score": 0.99, "score_plus_f": 1.2}]
    assert pick_two_stage(cells, "score", "score_plus_f") == (3, 2.5)
    cells[1]["score_plus_f"] = 1.5
    assert pick_two_stage(cells, "score", "score_plus_f") == (3, 1.5)
    assert pick_sum(cells) == (2, 1.5)


def test_naive_agrees_when_global_max_wins_stage_one():
    cells = [{"k": 2, "lam": 1.5, "score": 0.8, "score_plus_f": 1.5},
             {"k": 3, "lam": 1.5, "score": 0.99, "score_plus_f": 1.97},
             {"k": 3, "lam": 2.5, "score": 0.97, "score_plus_f": 1.9}]
    assert pick_sum(cells) == pick_two_stage(cells, "score", "score_plus_f") == (3, 1.5)
    assert pick_sum(cells[:1]) == (2, 1.5)
    with pytest.raises(ValueError):
        pick_sum([{"k": 2, "lam": 1.5, "score_plus_f": None}])


def test_s4_recovers_small_design(small):
    grids = build_grids(small.X, [2, 3, 4], m=6, seed=0)
    rep = s4_joint_select(small.X, grids, B=20, seed=0)
    naive = s4_naive_sum_select(small.X, grids, B=20, seed=0)
    assert rep.k_hat == 3
    assert rep.table == naive.table
    assert rep.mask.sum() == rep.n_selected_at_choice
    c = rep.cell(rep.k_hat, rep.lambda_hat)
    row = [x for x in rep.table if x["k"] == rep.k_hat and x["score_plus_f"] is not None]
    assert max(x["score"] for x in rep.table if x["k"] == rep.k_hat) == max(x["score"] for x in rep.table)
    assert c["score_plus_f"] == max(x["score_plus_f"] for x in row)


def test_gap_on_permuted_data_is_near_zero(small):
    Xp = permute_columns(small.X, np.random.default_rng(7))
    rep = gap_joint_select(Xp, {2: [1.5, 3.0], 3: [1.5, 3.0, 6.0]}, B=20, seed=3)
    assert all(abs(c["gap"]) < 0.15 for c in rep.table)


def test_gap_rules(small):
    rep = gap_joint_select(small.X, {2: [1.5, 3.0], 3: [1.5, 3.0]}, B=10, seed=1)
    best = max(rep.table, key=lambda c: c["gap"])
    assert rep.k_hat == best["k"]
    row = [c for c in rep.table if c["k"] == rep.k_hat and c["gap"] >= best["gap"] - best["sd"]]
    assert rep.lambda_hat == min(c["lam"] for c in row)
    with pytest.raises(ValueError):
        gap_joint_select(small.X, {2: [1.5]}, B=5)


def test_permute_columns_keeps_marginals():
    X = np.arange(20.0).reshape(10, 2)
    P = permute_columns(X, np.random.default_rng(0))
    assert np.array_equal(np.sort(P, axis=0), X)


def test_config_validation():
    with pytest.raises(ValueError, match="'f'"):
        SelectionConfig(f=1.2).validate()
    with pytest.raises(ValueError, match="'k_max'"):
        SelectionConfig(k_max=50).validate(40)
    with pytest.raises(ValueError, match="unknown method"):
        estimate("Elbow", np.random.default_rng(0).normal(size=(20, 5)), k_max=3)


def test_facade_matches_direct_call_and_is_deterministic(small):
    grids = build_grids(small.X, [2, 3], m=4, seed=5)
    a = estimate("S4", small.X, grids=grids, k_max=3, B=6, seed=5)
    b = estimate("S4", small.X, grids=grids, k_max=3, B=6, seed=5)
    d = s4_joint_select(small.X, grids, B=6, seed=5)
    assert a.table == b.table == d.table
    assert (a.k_hat, a.lambda_hat) == (d.k_hat, d.lambda_hat)
    assert a.details["config"].B == 6


def test_thread_count_does_not_change_tables(small):
    grids = {2: [1.5, 3.0], 3: [2.0]}
    for fn, kw in ((s4_joint_select, {"B": 6}), (gap_joint_select, {"B": 10})):
        one = fn(small.X, grids, seed=4, threads=1, **kw)
        many = fn(small.X, grids, seed=4, threads=4, **kw)
        assert one.table == many.table
    p1 = estimate("PsJoint", small.X, grids=grids, k_max=3, n_splits=3, seed=4, threads=1)
    p4 = estimate("PsJoint", small.X, grids=grids, k_max=3, n_splits=3, seed=4, threads=4)
    assert p1.table == p4.table


def test_lambda_grid_object_reuses_fits(small):
    g = build_lambda_grid(small.X, 3, m=3, seed=9)
    assert isinstance(g, LambdaGrid)
    rep = s4_joint_select(small.X, {3: g}, B=5, seed=9)
    fit = rep.details["fits"][(3, float(g.lambdas[0]))]
    assert fit is g.fits[g.lambdas[0]]
