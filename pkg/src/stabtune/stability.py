"""Selection stability: Cohen's kappa between active sets and the kappa criterion.

The stability of a selection procedure at a given λ is estimated by fitting
it on both halves of repeated random half-splits and averaging the kappa
agreement of the two active sets. λ is then chosen as the smallest grid
value whose averaged stability is within a factor ``1 - alpha`` of the best.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import center_and_scale, random_half_split
from .errors import NoStableModelError, StabtuneError
from .solvers import _check_grid, path_coefficients, ACTIVE_TOL


@dataclass(frozen=True)
class KappaInputs:
    n11: int
    n12: int
    n21: int
    n22: int

    @property
    def p(self):
        return self.n11 + self.n12 + self.n21 + self.n22

    @classmethod
    def from_masks(cls, m1, m2):
        m1 = np.asarray(m1, dtype=bool)
        m2 = np.asarray(m2, dtype=bool)
        return cls(int(np.sum(m1 & m2)), int(np.sum(m1 & ~m2)),
                   int(np.sum(~m1 & m2)), int(np.sum(~m1 & ~m2)))

    def kappa(self):
        p = self.p
        if self.n12 == self.n21 == 0 and (self.n11 == p or self.n22 == p):
            # both empty or both complete
            return -1.0
        # (Pr(a) - Pr(e)) / (1 - Pr(e)) with the common p^2 cleared, so the only
        # rounding is in the final integer division
        e = ((self.n11 + self.n12) * (self.n11 + self.n21)
             + (self.n12 + self.n22) * (self.n21 + self.n22))
        return (p * (self.n11 + self.n22) - e) / (p * p - e)


@dataclass(frozen=True, eq=False)
class StabilityCurve:
    lambda_grid: np.ndarray
    s_hat: np.ndarray
    per_split_kappa: np.ndarray
    B: int
    m: int


@dataclass(frozen=True, eq=False)
class KappaSelection:
    lambda_hat: float
    alpha: float
    s_max: float
    curve: StabilityCurve
    index: int


def kappa(a1, a2):
    """Kappa agreement of two :class:`~stabtune.solvers.ActiveSet` objects.

    Two empty sets, or two complete sets, score -1.
    """
    if a1.p != a2.p:
        raise ValueError(f"active sets over different p ({a1.p} vs {a2.p})")
    if a1.p < 2:
        raise ValueError("kappa needs p >= 2")
    return KappaInputs.from_masks(a1.mask, a2.mask).kappa()


def kappa_rows(M1, M2):
    """Row-wise kappa for two boolean matrices of selection indicators."""
    M1 = np.asarray(M1, dtype=bool)
    M2 = np.asarray(M2, dtype=bool)
    p = M1.shape[-1]
    n11 = np.sum(M1 & M2, axis=-1)
    n12 = np.sum(M1 & ~M2, axis=-1)
    n21 = np.sum(~M1 & M2, axis=-1)
    n22 = p - n11 - n12 - n21
    e = (n11 + n12) * (n11 + n21) + (n12 + n22) * (n21 + n22)
    degenerate = (n12 == 0) & (n21 == 0) & ((n11 == p) | (n22 == p))
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (p * (n11 + n22) - e) / (p * p - e)
    return np.where(degenerate, -1.0, k)


def _selection_path(half, penalty, grid):
    prepared = center_and_scale(half)
    betas, _, _ = path_coefficients(prepared, penalty, grid)
    return np.abs(betas) > ACTIVE_TOL


def estimate_stability(ds, penalty, lambda_grid, B=20, rng=None):
    """Average split-half kappa over ``B`` random half-splits.

    Each half is centered and standardized on its own, and an adaptive-lasso
    penalty without explicit weights takes its weights from that half.
    Split ``b`` draws from the ``b``-th child of ``rng``, so the result does
    not depend on the order in which splits are evaluated.
    """
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    grid = _check_grid(lambda_grid)
    rng = np.random.default_rng(rng)
    children = rng.spawn(B)
    K = np.empty((B, grid.size))
    m = ds.n // 2
    for b, child in enumerate(children):
        pair = random_half_split(ds, child)
        try:
            A1 = _selection_path(pair.first, penalty, grid)
            A2 = _selection_path(pair.second, penalty, grid)
        except StabtuneError as exc:
            exc.args = (f"split {b}: {exc}",) + exc.args[1:]
            raise
        K[b] = kappa_rows(A1, A2)
    return StabilityCurve(grid, K.mean(axis=0), K, B, m)


def select_lambda_kappa(curve, alpha=0.1):
    """Smallest λ with ``s_hat / max(s_hat) >= 1 - alpha``."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    s = np.asarray(curve.s_hat, dtype=float)
    if s.size == 0:
        raise ValueError("empty stability curve")
    s_max = float(s.max())
    if not s_max > 0:
        raise NoStableModelError(
            f"maximum averaged stability is {s_max:.4g}; the ratio rule needs a positive maximum")
    ok = np.flatnonzero(s / s_max >= 1.0 - alpha)
    grid = np.asarray(curve.lambda_grid)
    i = int(ok[np.argmin(grid[ok])])
    return KappaSelection(float(grid[i]), float(alpha), s_max, curve, i)
