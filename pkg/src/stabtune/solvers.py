"""Penalized least squares by cyclic coordinate descent.

Minimizes ``(1/n)||y - X b||^2 + sum_j pen(|b_j|)`` for the lasso, the
adaptive lasso and SCAD. The loss is written through the Gram quantities
``G = X'X/n`` and ``c = X'y/n``, so the part of the objective that depends
on a single coordinate is ``G_jj b^2 - 2 z_j b + pen(|b|)`` with
``z_j = c_j - sum_{k != j} G_jk b_k``. Because the squared loss carries 1/n
rather than 1/(2n), every threshold below is λ/2, not λ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DivergenceError, RankError

LASSO, ADAPTIVE_LASSO, SCAD = "lasso", "adaptive_lasso", "scad"
PENALTIES = (LASSO, ADAPTIVE_LASSO, SCAD)
_KIND_CODE = {LASSO: 0, ADAPTIVE_LASSO: 1, SCAD: 2}

ACTIVE_TOL = 1e-8
CONVERGENCE_TOL = 1e-7
MAX_SWEEPS = 10_000
DEFAULT_GAMMA = 3.7
WEIGHT_CAP = 1e8


@dataclass(frozen=True, eq=False)
class PenaltySpec:
    """Which penalty to use.

    For the adaptive lasso ``weights=None`` means "derive them from an OLS fit
    on whatever data the penalty is applied to", which is what resampling
    procedures need.
    """

    kind: str = LASSO
    gamma: float = DEFAULT_GAMMA
    weights: np.ndarray = None

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise ValueError(f"unknown penalty {self.kind!r}; expected one of {PENALTIES}")
        if self.kind == SCAD and not self.gamma > 2:
            raise ValueError(f"SCAD needs gamma > 2, got {self.gamma}")
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
            if not (np.isfinite(w).all() and (w > 0).all()):
                raise ValueError("adaptive weights must be finite and positive")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @classmethod
    def lasso(cls):
        return cls(LASSO)

    @classmethod
    def adaptive_lasso(cls, weights=None):
        return cls(ADAPTIVE_LASSO, weights=weights)

    @classmethod
    def scad(cls, gamma=DEFAULT_GAMMA):
        return cls(SCAD, gamma=gamma)


@dataclass(frozen=True)
class ActiveSet:
    """Sorted, 0-based indices of the selected variables out of ``p``."""

    indices: tuple
    p: int

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        if idx and (idx[0] < 0 or idx[-1] >= self.p):
            raise ValueError(f"indices {idx} out of range for p={self.p}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(np.flatnonzero(mask)), mask.size)

    @classmethod
    def from_beta(cls, beta, tol=ACTIVE_TOL):
        return cls.from_mask(np.abs(np.asarray(beta)) > tol)

    @property
    def mask(self):
        m = np.zeros(self.p, dtype=bool)
        m[list(self.indices)] = True
        return m

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return j in self.indices


@dataclass(frozen=True, eq=False)
class FitResult:
    beta: np.ndarray
    lam: float
    active: ActiveSet
    objective: float
    iterations: int
    converged: bool


def soft_threshold(z, t):
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return float(np.sign(z) * max(abs(z) - t, 0.0))


def scad_derivative(theta, lam, gamma=DEFAULT_GAMMA):
    if theta <= lam:
        return float(lam)
    return max(gamma * lam - theta, 0.0) / (gamma - 1.0)


def scad_penalty(theta, lam, gamma=DEFAULT_GAMMA):
    """SCAD penalty value, the integral of :func:`scad_derivative` from 0 to ``theta``."""
    theta = np.abs(np.asarray(theta, dtype=float))
    mid = (2 * gamma * lam * theta - theta ** 2 - lam ** 2) / (2 * (gamma - 1))
    return np.where(theta <= lam, lam * theta,
                    np.where(theta <= gamma * lam, mid, lam ** 2 * (gamma + 1) / 2))


def penalty_value(beta, lam, penalty):
    a = np.abs(beta)
    if penalty.kind == SCAD:
        return float(np.sum(scad_penalty(a, lam, penalty.gamma)))
    if penalty.kind == ADAPTIVE_LASSO:
        return float(lam * np.sum(penalty.weights * a))
    return float(lam * np.sum(a))


def objective(ds, beta, lam, penalty):
    r = ds.y - ds.X @ beta
    return float(r @ r) / ds.n + penalty_value(beta, lam, penalty)


# --------------------------------------------------------------------------
# compiled kernels

@njit(cache=True)
def _update(z, a, lam, w, kind, gamma):
    # argmin_b a*b^2 - 2*z*b + pen(|b|); strictly convex whenever 2a(gamma-1) > 1
    az = abs(z)
    s = 1.0 if z > 0 else -1.0
    if kind != 2:
        t = 0.5 * lam * w
        if az <= t:
            return 0.0
        return s * (az - t) / a
    if az <= 0.5 * lam:
        return 0.0
    if az <= a * lam + 0.5 * lam:
        return s * (az - 0.5 * lam) / a
    if az <= a * gamma * lam:
        return s * (2.0 * (gamma - 1.0) * az - gamma * lam) / (2.0 * a * (gamma - 1.0) - 1.0)
    return z / a


@njit(cache=True)
def _descend(G, c, beta, lam, w, kind, gamma, tol, max_sweeps):
    p = c.shape[0]
    Gb = G @ beta
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(p):
            old = beta[j]
            z = c[j] - Gb[j] + G[j, j] * old
            new = _update(z, G[j, j], lam, w[j], kind, gamma)
            d = new - old
            if d != 0.0:
                beta[j] = new
                for k in range(p):
                    Gb[k] += d * G[k, j]
                if abs(d) > max_change:
                    max_change = abs(d)
        if not np.isfinite(max_change):
            return sweep + 1, False, False
        if max_change < tol:
            return sweep + 1, True, True
    return max_sweeps, False, True


@njit(cache=True)
def _path(G, c, lams, w, kind, gamma, tol, max_sweeps):
    L = lams.shape[0]
    p = c.shape[0]
    betas = np.zeros((L, p))
    iters = np.zeros(L, dtype=np.int64)
    conv = np.zeros(L, dtype=np.bool_)
    ok = np.ones(L, dtype=np.bool_)
    ones = np.ones(p)
    lasso_beta = np.zeros(p)
    beta = np.zeros(p)
    for i in range(L):
        if kind == 2:
            # SCAD starts from the lasso solution at the same lambda
            it0, c0, f0 = _descend(G, c, lasso_beta, lams[i], ones, 0, gamma, tol, max_sweeps)
            beta[:] = lasso_beta
            it, cv, fin = _descend(G, c, beta, lams[i], ones, 2, gamma, tol, max_sweeps)
            it += it0
            cv = cv and c0
            fin = fin and f0
        else:
            it, cv, fin = _descend(G, c, beta, lams[i], w, kind, gamma, tol, max_sweeps)
        betas[i] = beta
        iters[i] = it
        conv[i] = cv
        ok[i] = fin
        if not fin:
            break
    return betas, iters, conv, ok


# --------------------------------------------------------------------------

def _check_prepared(ds):
    if not (ds.centered and ds.standardized):
        raise ValueError("solvers need a centered and standardized dataset; "
                         "call center_and_scale first")


def _gram(ds):
    return ds.X.T @ ds.X / ds.n, ds.X.T @ ds.y / ds.n


def adaptive_weights(ds):
    """Reciprocal absolute OLS coefficients, capped at 1e8."""
    if ds.n <= ds.p or np.linalg.matrix_rank(ds.X) < ds.p:
        raise RankError(f"adaptive lasso needs a full-rank design with n > p "
                        f"(n={ds.n}, p={ds.p})")
    beta, *_ = np.linalg.lstsq(ds.X, ds.y, rcond=None)
    a = np.abs(beta)
    return np.where(a < 1.0 / WEIGHT_CAP, WEIGHT_CAP, 1.0 / np.maximum(a, 1.0 / WEIGHT_CAP))


def resolve_penalty(ds, penalty):
    """Fill in adaptive-lasso weights from ``ds`` when the penalty leaves them open."""
    if penalty.kind == ADAPTIVE_LASSO and penalty.weights is None:
        return PenaltySpec(ADAPTIVE_LASSO, penalty.gamma, adaptive_weights(ds))
    if penalty.kind == ADAPTIVE_LASSO and len(penalty.weights) != ds.p:
        raise ValueError(f"{len(penalty.weights)} weights for p={ds.p}")
    return penalty


def _weights(penalty, p):
    return np.ones(p) if penalty.weights is None else np.asarray(penalty.weights, dtype=float)


def _result(ds, beta, lam, penalty, iterations, converged):
    beta = np.array(beta)
    obj = objective(ds, beta, lam, penalty)
    if not np.isfinite(obj):
        raise DivergenceError(f"objective became non-finite at lambda={lam}")
    return FitResult(beta, float(lam), ActiveSet.from_beta(beta), obj, int(iterations),
                     bool(converged))


def fit(ds, penalty, lam, warm_start=None, tol=CONVERGENCE_TOL, max_sweeps=MAX_SWEEPS):
    """Minimize the penalized least-squares objective at a single ``lam``.

    SCAD without a warm start is started from the lasso solution at ``lam``.
    """
    _check_prepared(ds)
    if not lam >= 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    penalty = resolve_penalty(ds, penalty)
    G, c = _gram(ds)
    w = _weights(penalty, ds.p)
    kind = _KIND_CODE[penalty.kind]
    if warm_start is None and kind == 2:
        warm_start = fit(ds, PenaltySpec.lasso(), lam, tol=tol, max_sweeps=max_sweeps).beta
    beta = np.zeros(ds.p) if warm_start is None else np.array(warm_start, dtype=float)
    if beta.shape != (ds.p,):
        raise ValueError(f"warm start has shape {beta.shape}, expected ({ds.p},)")
    iters, converged, finite = _descend(G, c, beta, float(lam), w, kind,
                                        float(penalty.gamma), tol, max_sweeps)
    if not finite:
        raise DivergenceError(f"coordinate descent diverged at lambda={lam}")
    return _result(ds, beta, lam, penalty, iters, converged)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if not (grid >= 0).all() or np.any(np.diff(grid) > 0):
        raise ValueError("lambda grid must be non-negative and sorted in descending order")
    return grid


def path_coefficients(ds, penalty, lambda_grid, tol=CONVERGENCE_TOL, max_sweeps=MAX_SWEEPS):
    """Coefficient matrix (one row per grid value) along a warm-started path.

    This is the array-level core of :func:`fit_path`; resampling code uses it
    directly to avoid building a result object per grid point.
    """
    _check_prepared(ds)
    grid = _check_grid(lambda_grid)
    penalty = resolve_penalty(ds, penalty)
    G, c = _gram(ds)
    betas, iters, conv, ok = _path(G, c, grid, _weights(penalty, ds.p),
                                   _KIND_CODE[penalty.kind], float(penalty.gamma),
                                   tol, max_sweeps)
    if not ok.all():
        bad = int(np.argmin(ok))
        raise DivergenceError(f"coordinate descent diverged at lambda={grid[bad]}")
    return betas, iters, conv


def fit_path(ds, penalty, lambda_grid, tol=CONVERGENCE_TOL, max_sweeps=MAX_SWEEPS):
    grid = _check_grid(lambda_grid)
    penalty = resolve_penalty(ds, penalty)
    betas, iters, conv = path_coefficients(ds, penalty, grid, tol, max_sweeps)
    out = []
    for lam, b, it, cv in zip(grid, betas, iters, conv):
        try:
            out.append(_result(ds, b, lam, penalty, it, cv))
        except DivergenceError as exc:
            exc.args = (f"{exc} (path grid value {lam})",)
            raise
    return out


def ols_refit(ds, active):
    """Least squares on the active columns; zeros elsewhere."""
    beta = np.zeros(ds.p)
    idx = list(active)
    if not idx:
        return beta
    if len(idx) >= ds.n:
        raise RankError(f"cannot refit {len(idx)} variables on {ds.n} rows")
    Xa = ds.X[:, idx]
    if np.linalg.matrix_rank(Xa) < len(idx):
        raise RankError(f"active columns {idx} are linearly dependent")
    beta[idx], *_ = np.linalg.lstsq(Xa, ds.y, rcond=None)
    return beta


def lambda_max(ds):
    """Smallest λ at which the lasso solution is identically zero."""
    return float(np.max(np.abs(2.0 * ds.X.T @ ds.y / ds.n)))


def log_grid(log10_min=-2.0, log10_max=2.0, points=100):
    """Descending grid ``10**(lo + (hi-lo) l/(points-1))``, l = points-1, ..., 0."""
    if points == 1:
        return np.array([10.0 ** log10_max])
    return 10.0 ** np.linspace(log10_min, log10_max, points)[::-1]


def kkt_violation(ds, beta, lam, penalty):
    """Largest violation of the stationarity conditions at ``beta``.

    For zero coordinates the gradient ``(2/n) x_j'r`` must lie within the
    penalty's subgradient interval; for nonzero ones it must equal the penalty
    derivative times the sign.
    """
    penalty = resolve_penalty(ds, penalty)
    g = 2.0 * ds.X.T @ (ds.y - ds.X @ beta) / ds.n
    worst = 0.0
    for j in range(ds.p):
        b = beta[j]
        if penalty.kind == SCAD:
            d = scad_derivative(abs(b), lam, penalty.gamma)
        elif penalty.kind == ADAPTIVE_LASSO:
            d = lam * penalty.weights[j]
        else:
            d = lam
        if b == 0.0:
            v = max(abs(g[j]) - d, 0.0)
        else:
            v = abs(g[j] - d * np.sign(b))
        worst = max(worst, v)
    return worst
