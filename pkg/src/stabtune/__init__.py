"""Tuning penalized least squares by variable-selection stability."""

__version__ = "0.1.0"

from .data import Dataset, SplitPair, center_and_scale, load_csv, random_half_split, train_test_split
from .solvers import ActiveSet, FitResult, PenaltySpec, fit, fit_path, log_grid, ols_refit
from .stability import StabilityCurve, estimate_stability, kappa, select_lambda_kappa
from .criteria import select_lambda_by_criterion
from .tuning import tune

__all__ = [
    "Dataset", "SplitPair", "center_and_scale", "load_csv", "random_half_split",
    "train_test_split", "ActiveSet", "FitResult", "PenaltySpec", "fit", "fit_path",
    "log_grid", "ols_refit", "StabilityCurve", "estimate_stability", "kappa",
    "select_lambda_kappa", "select_lambda_by_criterion", "tune",
]
