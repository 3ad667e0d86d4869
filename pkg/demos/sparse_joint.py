"""Pick the cluster count and the sparsity bound together.

1000 features, of which the first 50 separate three clusters. One lambda
grid is built per k, every cell is scored by subsample concordance, and
the two-stage rule picks (K, lambda). Under a minute on one core.
"""

from sparseclust import build_grids, s4_joint_select
from sparseclust.metrics import ari, jaccard
from sparseclust.simgen import generate_highdim_independent

data = generate_highdim_independent(q=50, u=0.8, seed=4)
X = data.X

grids = build_grids(X, [2, 3, 4], m=8, seed=0)
for k, g in grids.items():
    print(f"k={k}: {len(g)} lambdas, feature counts {g.feature_counts.tolist()}")

rep = s4_joint_select(X, grids, B=30, seed=0)

print("\n  k   lambda   selected   score      F")
for c in rep.table:
    F = "   NA" if c["F"] is None else f"{c['F']:.3f}"
    mark = " <-" if (c["k"], c["lam"]) == (rep.k_hat, rep.lambda_hat) else ""
    print(f"  {c['k']}  {c['lam']:7.3f}  {c['n_selected']:8d}   {c['score']:.3f}  {F}{mark}")

print(f"\nchosen K={rep.k_hat}, lambda={rep.lambda_hat:.3f}, {rep.n_selected_at_choice} features")
print(f"ARI vs truth {ari(rep.labels, data.truth):.3f}, "
      f"Jaccard vs informative set {jaccard(rep.mask, data.true_features):.3f}")
print(f"took {rep.runtime:.1f}s")
