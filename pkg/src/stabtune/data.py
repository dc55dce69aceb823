"""Datasets: loading, centering/standardization, and random row splits.

A :class:`Dataset` is immutable. Transformations return new objects and
carry the affine map back to the original units in ``column_means``,
``column_scales`` and ``y_mean`` so that fitted coefficients can be
reported on the scale of the input file.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateColumnError, ParseError, SchemaError, TooFewRowsError

CENTER_TOL = 1e-10
SCALE_RTOL = 1e-8


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    y: np.ndarray
    X: np.ndarray
    column_names: tuple = ()
    centered: bool = False
    standardized: bool = False
    column_means: np.ndarray = None
    column_scales: np.ndarray = None
    y_mean: float = 0.0

    def __post_init__(self):
        y = _frozen(self.y).reshape(-1)
        X = _frozen(self.X)
        if X.ndim == 1:
            X = _frozen(X.reshape(-1, 1))
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"X has shape {X.shape} but y has length {y.shape[0]}")
        n, p = X.shape
        if n < 2 or p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValueError("dataset contains non-finite entries")
        names = tuple(self.column_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise ValueError(f"{len(names)} column names for {p} columns")
        means = np.zeros(p) if self.column_means is None else self.column_means
        scales = np.ones(p) if self.column_scales is None else self.column_scales
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "column_means", _frozen(means))
        object.__setattr__(self, "column_scales", _frozen(scales))
        object.__setattr__(self, "y_mean", float(self.y_mean))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def subset(self, rows):
        """Rows ``rows`` of the dataset, with the same transformation metadata."""
        rows = np.asarray(rows)
        return Dataset(
            self.y[rows], self.X[rows], self.column_names,
            column_means=self.column_means, column_scales=self.column_scales,
            y_mean=self.y_mean,
        )

    def transform_rows(self, X_original):
        """Map original-unit predictor rows into this dataset's coordinates."""
        return (np.asarray(X_original, dtype=float) - self.column_means) / self.column_scales

    def to_original_scale(self, beta):
        """Return ``(intercept, coef)`` on the original units for coefficients fit here."""
        beta = np.asarray(beta, dtype=float)
        coef = beta / self.column_scales
        intercept = self.y_mean - float(self.column_means @ coef)
        return intercept, coef

    def predict_original(self, beta, X_original):
        intercept, coef = self.to_original_scale(beta)
        return intercept + np.asarray(X_original, dtype=float) @ coef


@dataclass(frozen=True, eq=False)
class SplitPair:
    first: Dataset
    second: Dataset
    m: int
    first_rows: np.ndarray = field(repr=False, default=None)
    second_rows: np.ndarray = field(repr=False, default=None)


def _parse_float(text, row, column):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"row {row}, column {column!r}: cannot parse {text!r} as a number",
            row=row, column=column,
        ) from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {column!r}: non-finite value {text!r}",
                         row=row, column=column)
    return value


_TRUE = {"t", "true", "1", "yes", "y"}
_FALSE = {"f", "false", "0", "no", "n"}


def _read_rows(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ParseError(f"{path}: row {i} has {len(r)} fields, header has {len(header)}",
                             row=i)
    return header, body


def load_csv(path, response_column, ignore_columns=()):
    """Read a header-first CSV into a raw (untransformed) :class:`Dataset`.

    Every column other than the response and ``ignore_columns`` is used as a
    predictor, in file order. Row numbers in error messages count the header
    as row 1.
    """
    header, body = _read_rows(path)
    if response_column not in header:
        raise SchemaError(f"{path}: response column {response_column!r} not found; "
                          f"columns are {header}")
    missing = [c for c in ignore_columns if c not in header]
    if missing:
        raise SchemaError(f"{path}: columns {missing} not found")
    predictors = [h for h in header if h != response_column and h not in ignore_columns]
    if not predictors:
        raise SchemaError(f"{path}: no predictor columns")
    iy = header.index(response_column)
    ix = [header.index(h) for h in predictors]
    y = np.empty(len(body))
    X = np.empty((len(body), len(predictors)))
    for i, r in enumerate(body):
        y[i] = _parse_float(r[iy].strip(), i + 2, response_column)
        for k, j in enumerate(ix):
            X[i, k] = _parse_float(r[j].strip(), i + 2, header[j])
    if len(body) < 2:
        raise TooFewRowsError(f"{path}: need at least 2 data rows, found {len(body)}")
    return Dataset(y, X, tuple(predictors))


def load_split_column(path, column):
    """Boolean train indicator stored in ``column`` (T/F, true/false, 1/0)."""
    header, body = _read_rows(path)
    if column not in header:
        raise SchemaError(f"{path}: split column {column!r} not found")
    j = header.index(column)
    mask = np.empty(len(body), dtype=bool)
    for i, r in enumerate(body):
        v = r[j].strip().lower()
        if v in _TRUE:
            mask[i] = True
        elif v in _FALSE:
            mask[i] = False
        else:
            raise ParseError(f"row {i + 2}, column {column!r}: {r[j]!r} is not a boolean",
                             row=i + 2, column=column)
    return mask


def center_and_scale(ds, scale=True):
    """Center y and every column; optionally rescale columns to x_jᵀx_j = n.

    Applying this to an already transformed dataset composes the affine maps,
    so the metadata always refers to the units of the original data.
    """
    mx = ds.X.mean(axis=0)
    my = ds.y.mean()
    Xc = ds.X - mx
    yc = ds.y - my
    if scale:
        s = np.sqrt(np.mean(Xc ** 2, axis=0))
        ref = np.maximum(np.abs(ds.X).max(axis=0), 1.0)
        for j in range(ds.p):
            if not s[j] > 1e-12 * ref[j]:
                raise DegenerateColumnError(ds.column_names[j])
        Xc = Xc / s
    else:
        s = np.ones(ds.p)
    return Dataset(
        yc, Xc, ds.column_names,
        centered=True, standardized=scale or ds.standardized,
        column_means=ds.column_means + ds.column_scales * mx,
        column_scales=ds.column_scales * s,
        y_mean=ds.y_mean + my,
    )


def random_half_split(ds, rng):
    """Split rows into two disjoint random halves of size ⌊n/2⌋.

    With odd n the last row of the permutation is left out.
    """
    n = ds.n
    if n < 4:
        raise TooFewRowsError(f"half-splitting needs n >= 4, got n={n}")
    m = n // 2
    perm = rng.permutation(n)
    a, b = perm[:m], perm[m:2 * m]
    return SplitPair(ds.subset(a), ds.subset(b), m, a, b)


def train_test_split(ds, n_train, rng):
    if not 1 <= n_train < ds.n:
        raise ValueError(f"n_train must be in [1, {ds.n - 1}], got {n_train}")
    perm = rng.permutation(ds.n)
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))
