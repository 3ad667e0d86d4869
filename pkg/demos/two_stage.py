"""Why the cluster count is fixed before the feature term is used.

In this design clusters 2 and 3 differ only on 100 of 300 features. With
K=2 the fit keeps a small, very stable feature set, so adding the feature
concordance to the score in one step favours K=2. Choosing K from the
cluster score alone and only then tuning lambda recovers K=3.
"""

from sparseclust import build_grids, pick_sum, s4_joint_select
from sparseclust.simgen import generate_s1_design

data = generate_s1_design(seed=2)
grids = build_grids(data.X, [2, 3, 4], m=8, seed=0)
rep = s4_joint_select(data.X, grids, B=30, seed=0)

for k in (2, 3, 4):
    row = [c for c in rep.table if c["k"] == k]
    best = max(c["score"] for c in row)
    sums = [c["score_plus_f"] for c in row if c["score_plus_f"] is not None]
    print(f"k={k}: best cluster score {best:.3f}, best score + F {max(sums):.3f}")

print("two-stage choice:", (rep.k_hat, round(rep.lambda_hat, 3)))
k, lam = pick_sum(rep.table)
print("one-step sum choice:", (k, round(lam, 3)))
