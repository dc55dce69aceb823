"""Classical tuning criteria: Mallows' Cp, BIC, GCV and K-fold cross validation.

Cp, BIC and GCV score each point of a fitted path from its residual sum of
squares and its number of nonzero coefficients; CV refits the path on each
training fold. Minimizing λ wins, with exact ties going to the larger λ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import center_and_scale
from .errors import DomainError, FoldSizeError, SaturatedModelError
from .solvers import ACTIVE_TOL, _check_grid, path_coefficients

CRITERIA = ("cp", "bic", "cv", "gcv")


@dataclass(frozen=True)
class CriterionScore:
    criterion: str
    lam: float
    score: float
    df_hat: int
    sse: float


def df_hat(fit):
    """Number of nonzero coefficients in a fit (or a coefficient vector)."""
    beta = getattr(fit, "beta", fit)
    return int(np.sum(np.abs(np.asarray(beta)) > ACTIVE_TOL))


def sigma2_saturated(ds):
    n, p = ds.n, ds.p
    if n <= p:
        raise SaturatedModelError(f"saturated model needs n > p (n={n}, p={p}); "
                                  "Cp is unavailable")
    Xc = ds.X - ds.X.mean(axis=0)
    yc = ds.y - ds.y.mean()
    if np.linalg.matrix_rank(Xc) < p:
        raise SaturatedModelError("design is rank deficient; Cp is unavailable")
    beta, *_ = np.linalg.lstsq(Xc, yc, rcond=None)
    r = yc - Xc @ beta
    return float(r @ r) / (n - p)


def cp_score(sse, sigma2, n, df):
    return sse / sigma2 - n + 2 * df


def bic_score(sse, n, df):
    if not sse > 0:
        raise DomainError(f"BIC needs a positive SSE, got {sse}")
    return math.log(sse / n) + math.log(n) * df / n


def gcv_score(sse, n, df):
    if df >= n:
        raise DomainError(f"GCV undefined for df={df} >= n={n}")
    return sse / (n * (1 - df / n) ** 2)


def _folds(n, folds, rng):
    perm = rng.permutation(n)
    return np.array_split(perm, folds)


def cv_curve(ds, penalty, lambda_grid, folds=10, rng=None):
    """CV(λ) for every grid value: summed squared errors on held-out folds.

    Rows are dealt into ``folds`` near-equal random folds. Each training part
    is centered and standardized on its own and held-out rows are mapped
    through that transformation before prediction.
    """
    grid = _check_grid(lambda_grid)
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if ds.n < folds:
        raise FoldSizeError(f"cannot form {folds} folds from {ds.n} rows")
    rng = np.random.default_rng(rng)
    parts = _folds(ds.n, folds, rng)
    if min(len(f) for f in parts) < 2:
        raise FoldSizeError(f"{folds} folds of {ds.n} rows leave a fold with fewer than 2 rows")
    total = np.zeros(grid.size)
    for held in parts:
        train_rows = np.setdiff1d(np.arange(ds.n), held)
        train = center_and_scale(ds.subset(train_rows))
        betas, _, _ = path_coefficients(train, penalty, grid)
        # train's metadata is composed with ds's own; peel that off to act on ds rows
        shift = (train.column_means - ds.column_means) / ds.column_scales
        scale = train.column_scales / ds.column_scales
        pred = ((ds.X[held] - shift) / scale) @ betas.T + (train.y_mean - ds.y_mean)
        total += np.sum((ds.y[held][:, None] - pred) ** 2, axis=0)
    return total


def cv_score(ds, penalty, lam, folds=10, rng=None):
    return float(cv_curve(ds, penalty, [lam], folds, rng)[0])


def path_scores(prepared, betas, criterion, sigma2=None):
    """Cp, BIC or GCV for each row of ``betas`` fit on ``prepared``."""
    n = prepared.n
    R = prepared.y[None, :] - betas @ prepared.X.T
    sse = np.sum(R ** 2, axis=1)
    dfs = np.sum(np.abs(betas) > ACTIVE_TOL, axis=1)
    if criterion == "cp":
        if sigma2 is None:
            sigma2 = sigma2_saturated(prepared)
        scores = [cp_score(s, sigma2, n, d) for s, d in zip(sse, dfs)]
    elif criterion == "bic":
        scores = [bic_score(s, n, d) for s, d in zip(sse, dfs)]
    elif criterion == "gcv":
        scores = [gcv_score(s, n, d) for s, d in zip(sse, dfs)]
    else:
        raise ValueError(f"unknown path criterion {criterion!r}")
    return np.asarray(scores, dtype=float), sse, dfs


def argmin_larger_lambda(lambda_grid, scores):
    """Index of the minimal score; ties go to the larger λ."""
    grid = np.asarray(lambda_grid)
    scores = np.asarray(scores)
    ties = np.flatnonzero(scores == scores.min())
    return int(ties[np.argmax(grid[ties])])


def select_lambda_by_criterion(ds, penalty, lambda_grid, criterion, rng=None, folds=10,
                               betas=None):
    """Minimize one of Cp, BIC, GCV or CV over the grid.

    ``betas`` may carry a path already fit on ``center_and_scale(ds)`` so
    that several criteria can share one fit. Returns ``(lambda_hat, scores)``
    with one :class:`CriterionScore` per grid value.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    grid = _check_grid(lambda_grid)
    prepared = center_and_scale(ds)
    if betas is None:
        betas, _, _ = path_coefficients(prepared, penalty, grid)
    if criterion == "cv":
        values = cv_curve(ds, penalty, grid, folds, rng)
        R = prepared.y[None, :] - betas @ prepared.X.T
        sse = np.sum(R ** 2, axis=1)
        dfs = np.sum(np.abs(betas) > ACTIVE_TOL, axis=1)
    else:
        values, sse, dfs = path_scores(prepared, betas, criterion)
    scores = [CriterionScore(criterion, float(l), float(v), int(d), float(s))
              for l, v, d, s in zip(grid, values, dfs, sse)]
    i = argmin_larger_lambda(grid, values)
    return float(grid[i]), scores
