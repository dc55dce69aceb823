"""One entry point for every tuning criterion, kappa included."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import CRITERIA, select_lambda_by_criterion
from .data import center_and_scale
from .solvers import ActiveSet, ols_refit, path_coefficients, resolve_penalty, _check_grid
from .stability import estimate_stability, select_lambda_kappa

ALL_CRITERIA = ("kappa",) + CRITERIA


@dataclass(frozen=True, eq=False)
class Tuned:
    """A tuned model on the centered/standardized version of the data.

    ``curve`` holds the per-λ criterion values (averaged stability for kappa).
    """

    criterion: str
    lambda_hat: float
    index: int
    active: ActiveSet
    beta_penalized: np.ndarray
    beta_refit: np.ndarray
    prepared: object
    curve: np.ndarray
    selection: object = None


def tune(ds, penalty, lambda_grid, criterion, rng=None, *, alpha=0.1, B=20, folds=10,
         betas=None):
    """Select λ on ``ds`` with ``criterion`` and refit OLS on the selected variables.

    ``betas`` may hold the penalized path already fit on the full sample.
    """
    if criterion not in ALL_CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {ALL_CRITERIA}")
    grid = _check_grid(lambda_grid)
    prepared = center_and_scale(ds)
    full_penalty = resolve_penalty(prepared, penalty)
    if betas is None:
        betas, _, _ = path_coefficients(prepared, full_penalty, grid)
    selection = None
    if criterion == "kappa":
        curve = estimate_stability(ds, penalty, grid, B, rng)
        selection = select_lambda_kappa(curve, alpha)
        i = selection.index
        values = curve.s_hat
    else:
        lam, scores = select_lambda_by_criterion(ds, penalty, grid, criterion, rng,
                                                 folds, betas=betas)
        values = np.array([s.score for s in scores])
        i = int(np.flatnonzero(grid == lam)[0])
    return finish(prepared, grid, betas, criterion, i, values, selection)


def finish(prepared, grid, betas, criterion, i, values, selection=None):
    active = ActiveSet.from_beta(betas[i])
    return Tuned(criterion, float(grid[i]), int(i), active, betas[i].copy(),
                 ols_refit(prepared, active), prepared, np.asarray(values), selection)
