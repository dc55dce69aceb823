"""Simulation studies comparing tuning criteria.

Replicate ``i`` of a study draws all of its randomness from
``SeedSequence(seed, spawn_key=(i, ...))``, so a study is a pure function of
its configuration no matter how replicates are scheduled.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .errors import StabtuneError
from .solvers import PENALTIES, ActiveSet, PenaltySpec, log_grid, path_coefficients, resolve_penalty
from .data import center_and_scale
from .stability import estimate_stability, select_lambda_kappa
from .tuning import ALL_CRITERIA, finish, tune

SCENARIO1_BETA = (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)
SCENARIO2_LEAD = (5.0, 4.0, 3.0, 2.0, 1.0)
SCENARIO2_DIMS = {100: 10, 200: 14, 400: 20, 800: 28}

# spawn_key slots below the replicate index
_DATA, _TUNE = 0, 1


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    p: int
    beta_true: tuple
    sigma: float = 1.0
    rho: float = 0.5
    replicates: int = 100
    penalties: tuple = PENALTIES
    criteria: tuple = ALL_CRITERIA
    lambda_grid: tuple = tuple(log_grid())
    B: int = 20
    alpha: float = 0.1
    seed: int = 0
    folds: int = 10

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta_true)
        object.__setattr__(self, "beta_true", beta)
        object.__setattr__(self, "lambda_grid", tuple(float(l) for l in self.lambda_grid))
        object.__setattr__(self, "penalties", tuple(self.penalties))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if len(beta) != self.p:
            raise ValueError(f"beta_true has {len(beta)} entries for p={self.p}")
        if not 1 <= self.p0 <= self.p:
            raise ValueError("beta_true needs at least one nonzero entry")
        if np.any(np.diff(self.lambda_grid) > 0):
            raise ValueError("lambda grid must be descending")
        for k in self.penalties:
            if k not in PENALTIES:
                raise ValueError(f"unknown penalty {k!r}")
        for c in self.criteria:
            if c not in ALL_CRITERIA:
                raise ValueError(f"unknown criterion {c!r}")

    @property
    def p0(self):
        return sum(b != 0 for b in self.beta_true)

    @property
    def covariance(self):
        return ar1_covariance(self.p, self.rho)

    def to_dict(self):
        return asdict(self)


def scenario1_config(n, **overrides):
    if n not in (40, 60, 80):
        warnings.warn(f"scenario I is reported for n in {{40, 60, 80}}; running n={n}")
    return SimulationConfig(n=n, p=8, beta_true=SCENARIO1_BETA, **overrides)


def scenario2_config(n, sigma=1.0, **overrides):
    p = SCENARIO2_DIMS.get(n, int(round(math.sqrt(n))))
    if p < len(SCENARIO2_LEAD):
        raise ValueError(f"n={n} gives p={p}, fewer than the 5 informative variables")
    beta = SCENARIO2_LEAD + (0.0,) * (p - len(SCENARIO2_LEAD))
    return SimulationConfig(n=n, p=p, beta_true=beta, sigma=sigma, **overrides)


def ar1_covariance(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(np.subtract.outer(idx, idx)).astype(float)


def gen_ar1_design(n, p, rho, rng):
    """Rows i.i.d. N(0, Σ) with Σ_ij = rho^|i-j|."""
    if not abs(rho) < 1:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    L = np.linalg.cholesky(ar1_covariance(p, rho))
    return rng.standard_normal((n, p)) @ L.T


def gen_response(X, beta_true, sigma, rng):
    X = np.asarray(X, dtype=float)
    return X @ np.asarray(beta_true, dtype=float) + sigma * rng.standard_normal(X.shape[0])


def evaluate_selection(active, beta_true):
    """(exact recovery, correct zeros, incorrect zeros) of an active set."""
    truth = np.asarray(beta_true) != 0
    sel = active.mask
    exact = bool(np.array_equal(sel, truth))
    return exact, int(np.sum(~truth & ~sel)), int(np.sum(truth & ~sel))


def rpe(beta_hat, beta_true, Sigma, sigma):
    d = np.asarray(beta_hat, dtype=float) - np.asarray(beta_true, dtype=float)
    return float(d @ np.asarray(Sigma) @ d) / sigma ** 2


def stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class ReplicateMetrics:
    replicate: int
    penalty: str
    criterion: str
    lambda_hat: float
    exact_recovery: bool
    correct_zeros: int
    incorrect_zeros: int
    rpe: float
    error: str = ""

    @property
    def ok(self):
        return not self.error


def simulate_dataset(config, index):
    rng = stream(config.seed, index, _DATA)
    X = gen_ar1_design(config.n, config.p, config.rho, rng)
    y = gen_response(X, config.beta_true, config.sigma, rng)
    return Dataset(y, X)


def _tune_stream(config, index, criterion, penalty):
    return stream(config.seed, index, _TUNE, ALL_CRITERIA.index(criterion),
                  PENALTIES.index(penalty))


def _failed(index, penalty, criterion, exc):
    return ReplicateMetrics(index, penalty, criterion, math.nan, False, -1, -1, math.nan,
                            f"{type(exc).__name__}: {exc}")


def _metrics(config, index, penalty, tuned):
    _, coef = tuned.prepared.to_original_scale(tuned.beta_refit)
    exact, c, i = evaluate_selection(tuned.active, config.beta_true)
    return ReplicateMetrics(index, penalty, tuned.criterion, tuned.lambda_hat, exact, c, i,
                            rpe(coef, config.beta_true, config.covariance, config.sigma))


def run_replicate(config, index):
    """All (penalty, criterion) cells on one simulated dataset.

    Each penalty's path on the full sample is fit once and shared by the
    criteria; failures are recorded in the row's ``error`` field.
    """
    ds = simulate_dataset(config, index)
    grid = np.asarray(config.lambda_grid)
    rows = []
    for pen in config.penalties:
        penalty = PenaltySpec(pen)
        try:
            prepared = center_and_scale(ds)
            betas, _, _ = path_coefficients(prepared, resolve_penalty(prepared, penalty), grid)
        except StabtuneError as exc:
            rows.extend(_failed(index, pen, c, exc) for c in config.criteria)
            continue
        for crit in config.criteria:
            try:
                tuned = tune(ds, penalty, grid, crit, _tune_stream(config, index, crit, pen),
                             alpha=config.alpha, B=config.B, folds=config.folds, betas=betas)
                rows.append(_metrics(config, index, pen, tuned))
            except StabtuneError as exc:
                rows.append(_failed(index, pen, crit, exc))
    return rows


@dataclass(frozen=True)
class Aggregate:
    penalty: str
    criterion: str
    replicates: int
    failures: int
    true_set: float
    mean_C: float
    mean_I: float
    rpe_q1: float
    rpe_median: float
    rpe_q3: float
    rpe_mean: float

    @property
    def true_set_se(self):
        k = self.replicates - self.failures
        return math.sqrt(self.true_set * (1 - self.true_set) / k) if k else math.nan


def aggregate(rows):
    """Per-(penalty, criterion) summaries; failed rows count only as failures."""
    groups = {}
    for r in sorted(rows, key=lambda r: r.replicate):
        groups.setdefault((r.penalty, r.criterion), []).append(r)
    out = {}
    for (pen, crit), rs in groups.items():
        ok = [r for r in rs if r.ok]
        if ok:
            rp = np.array([r.rpe for r in ok])
            q1, q2, q3 = np.percentile(rp, [25, 50, 75])
            stats = (float(np.mean([r.exact_recovery for r in ok])),
                     float(np.mean([r.correct_zeros for r in ok])),
                     float(np.mean([r.incorrect_zeros for r in ok])),
                     float(q1), float(q2), float(q3), float(np.mean(rp)))
        else:
            stats = (math.nan,) * 7
        out[(crit, pen)] = Aggregate(pen, crit, len(rs), len(rs) - len(ok), *stats)
    return out


@dataclass
class StudyReport:
    config: SimulationConfig
    rows: list
    aggregates: dict = field(default_factory=dict)

    def cell(self, criterion, penalty):
        return self.aggregates[(criterion, penalty)]


def _replicate_task(args):
    config, index = args
    return run_replicate(config, index)


def run_study(config, jobs=1):
    indices = range(config.replicates)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_replicate_task, [(config, i) for i in indices]))
    else:
        chunks = [run_replicate(config, i) for i in indices]
    rows = [r for chunk in chunks for r in chunk]
    return StudyReport(config, rows, aggregate(rows))


def _sensitivity_replicate(args):
    config, index, alphas, pen = args
    ds = simulate_dataset(config, index)
    grid = np.asarray(config.lambda_grid)
    penalty = PenaltySpec(pen)
    out = np.full(len(alphas), math.nan)
    try:
        prepared = center_and_scale(ds)
        betas, _, _ = path_coefficients(prepared, resolve_penalty(prepared, penalty), grid)
        curve = estimate_stability(ds, penalty, grid, config.B,
                                   _tune_stream(config, index, "kappa", pen))
    except StabtuneError:
        return out
    for a, alpha in enumerate(alphas):
        try:
            sel = select_lambda_kappa(curve, alpha)
            tuned = finish(prepared, grid, betas, "kappa", sel.index, curve.s_hat, sel)
            out[a] = _metrics(config, index, pen, tuned).rpe
        except StabtuneError:
            pass
    return out


def alpha_sensitivity(config, alphas, penalty="lasso", jobs=1):
    """Mean RPE of the kappa criterion for each threshold in ``alphas``.

    One stability curve per replicate serves every threshold. The random
    streams match :func:`run_replicate`, so a single threshold reproduces the
    kappa cell of the corresponding study. Returns ``(alphas, mean_rpe,
    per_replicate_rpe)``.
    """
    alphas = [float(a) for a in alphas]
    tasks = [(config, i, alphas, penalty) for i in range(config.replicates)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per = list(pool.map(_sensitivity_replicate, tasks))
    else:
        per = [_sensitivity_replicate(t) for t in tasks]
    per = np.array(per).reshape(len(tasks), len(alphas))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        means = np.nanmean(per, axis=0)
    return np.array(alphas), means, per


# --------------------------------------------------------------------------
# CSV output

REPLICATE_COLUMNS = ("replicate", "penalty", "criterion", "lambda_hat", "exact", "C", "I",
                     "rpe", "error")
AGGREGATE_COLUMNS = ("penalty", "criterion", "replicates", "failures", "true_set", "mean_C",
                     "mean_I", "rpe_q1", "rpe_median", "rpe_q3", "rpe_mean")


def fmt(x):
    """17 significant digits for floats so that values survive a CSV round trip."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_replicates_csv(rows, path):
    write_csv(path, REPLICATE_COLUMNS,
              [(r.replicate, r.penalty, r.criterion, r.lambda_hat, r.exact_recovery,
                r.correct_zeros, r.incorrect_zeros, r.rpe, r.error) for r in rows])


def read_replicates_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [ReplicateMetrics(int(d["replicate"]), d["penalty"], d["criterion"],
                                 float(d["lambda_hat"]), d["exact"] == "1", int(d["C"]),
                                 int(d["I"]), float(d["rpe"]), d["error"])
                for d in csv.DictReader(fh)]


def write_aggregate_csv(aggregates, path):
    rows = sorted(aggregates.values(),
                  key=lambda a: (PENALTIES.index(a.penalty), ALL_CRITERIA.index(a.criterion)))
    write_csv(path, AGGREGATE_COLUMNS, [tuple(getattr(a, c) for c in AGGREGATE_COLUMNS)
                                        for a in rows])
