# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Prostate cancer data
#
# 97 men, eight clinical predictors, response log PSA. Fetch the data first:
#
#     python scripts/fetch_prostate.py
#
# We tune the lasso on 67 random rows with kappa and with 10-fold CV, then
# score the refitted model on the remaining 30. Repeating over random splits
# shows how often each variable is kept.

# %%
from collections import Counter
from pathlib import Path

import numpy as np

from stabtune import PenaltySpec, load_csv, log_grid, tune
from stabtune.data import train_test_split
from stabtune.experiments import stream

# run from the repository root
path = Path("data/prostate.csv")
header = path.read_text().splitlines()[0].split(",")
ds = load_csv(path, "lpsa", ignore_columns=[c for c in ("train",) if c in header])
print(ds.column_names)

# %%
grid = log_grid()
kept = {"kappa": Counter(), "cv": Counter()}
pe = {"kappa": [], "cv": []}
for r in range(50):
    train, test = train_test_split(ds, 67, stream(0, r, 0))
    for c, crit in enumerate(("kappa", "cv")):
        t = tune(train, PenaltySpec.lasso(), grid, crit, stream(0, r, 1, c))
        kept[crit].update(ds.column_names[j] for j in t.active)
        pred = t.prepared.predict_original(t.beta_refit, test.X)
        pe[crit].append(np.mean((test.y - pred) ** 2))

# %%
for crit in ("kappa", "cv"):
    freq = ", ".join(f"{name} {kept[crit][name] / 50:.2f}" for name in ds.column_names)
    print(f"{crit:>5}: median test PE {np.median(pe[crit]):.3f}\n       {freq}")
