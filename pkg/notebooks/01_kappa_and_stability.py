# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Selection stability on one simulated dataset
#
# We draw one dataset from the eight-variable AR(1) design, fit the lasso path
# on both halves of twenty random half-splits, and look at how the averaged
# kappa agreement of the two active sets moves along the λ grid.

# %%
import numpy as np

from stabtune import PenaltySpec, estimate_stability, log_grid, select_lambda_kappa
from stabtune.experiments import scenario1_config, simulate_dataset
from stabtune.solvers import ActiveSet
from stabtune.stability import kappa

config = scenario1_config(40)
ds = simulate_dataset(config, 0)
ds.n, ds.p

# %% [markdown]
# Kappa compares two active sets against what chance agreement would give.
# Identical non-trivial sets score 1; two empty (or two full) sets are set to -1
# so that the trivial models never look stable.

# %%
p = 8
for a, b in [([0, 1, 4], [0, 1, 4]), ([0, 1, 4], [0, 1]), ([0], [1]), ([], [])]:
    print(a, b, round(kappa(ActiveSet(a, p), ActiveSet(b, p)), 4))

# %%
grid = log_grid()
curve = estimate_stability(ds, PenaltySpec.lasso(), grid, B=20, rng=1)
sel = select_lambda_kappa(curve, alpha=0.1)
print(f"max stability {sel.s_max:.3f}, selected lambda {sel.lambda_hat:.4f}")

# %% [markdown]
# The curve as text: large λ on the left gives empty models (κ = -1), small λ
# on the right lets noise variables in and the agreement drops.

# %%
for lam, s in list(zip(curve.lambda_grid, curve.s_hat))[::5]:
    bar = "#" * int(max(s, 0) * 40)
    print(f"{lam:9.4f} {s:6.3f} {bar}")

# %% [markdown]
# Per-split spread at the chosen λ:

# %%
k = curve.per_split_kappa[:, sel.index]
print(np.round(np.sort(k), 3))
