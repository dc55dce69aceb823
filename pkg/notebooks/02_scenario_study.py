# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Comparing tuning criteria by simulation
#
# Eight AR(1) predictors with ρ = 0.5 and three true signals (3, 1.5, 2 on
# variables 1, 2, 5). For each replicate and each penalty we pick λ with kappa,
# Cp, BIC, 10-fold CV and GCV, refit by least squares on the selected
# variables, and record exact recovery, correct and incorrect zeros and RPE.

# %%
from stabtune.experiments import run_study, scenario1_config, scenario2_config

REPLICATES = 100


def show(report):
    for (crit, pen), a in sorted(report.aggregates.items(), key=lambda kv: kv[0][::-1]):
        print(f"{pen:>15} {crit:>6}  true={a.true_set:.2f}  C={a.mean_C:.2f}  "
              f"I={a.mean_I:.2f}  RPE median={a.rpe_median:.3f}")


# %%
for n in (40, 60, 80):
    print(f"--- n = {n}")
    show(run_study(scenario1_config(n, replicates=REPLICATES)))

# %% [markdown]
# A larger design where p grows with n (five signals, the rest zero), at low
# noise. Only kappa here to keep the run short.

# %%
show(run_study(scenario2_config(200, sigma=1.0, replicates=REPLICATES, criteria=("kappa",))))
