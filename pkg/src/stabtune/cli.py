"""Command-line front end.

Subcommands: ``tune``, ``simulate``, ``sensitivity`` and ``realdata``. Every
run writes its CSV outputs plus ``manifest.json`` into ``--out``; passing
that manifest back through ``--config`` repeats the run exactly.

Exit codes: 0 success, 2 bad arguments, 3 data errors, 4 numerical errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import load_csv, load_split_column, train_test_split
from .errors import DataError, NumericalError, StabtuneError
from .experiments import (
    alpha_sensitivity, run_study, scenario1_config, scenario2_config, stream,
    write_aggregate_csv, write_csv, write_replicates_csv,
)
from .solvers import PENALTIES, PenaltySpec, log_grid
from .tuning import ALL_CRITERIA, tune

EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

PENALTY_ALIASES = {"lasso": "lasso", "adalasso": "adaptive_lasso",
                   "adaptive_lasso": "adaptive_lasso", "scad": "scad"}


class UsageError(Exception):
    pass


def _penalty(name):
    try:
        return PENALTY_ALIASES[name.strip().lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown penalty {name!r}") from None


def _criterion(name):
    name = name.strip().lower()
    if name not in ALL_CRITERIA:
        raise argparse.ArgumentTypeError(f"unknown criterion {name!r}")
    return name


def _list_of(convert):
    def parse(text):
        if isinstance(text, (list, tuple)):
            return [convert(t) for t in text]
        return [convert(t) for t in str(text).split(",") if t.strip()]
    return parse


def parse_alphas(text):
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            count = int(round((parts[1] - parts[0]) / parts[2])) + 1
            values = [round(parts[0] + k * parts[2], 10) for k in range(count)]
        else:
            values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed alpha specification {text!r}") from None
    if not values or any(not 0 <= a < 1 for a in values):
        raise argparse.ArgumentTypeError(f"alphas must lie in [0, 1): {text!r}")
    return values


def _add_common(p, penalties_list=False):
    p.add_argument("--config", help="key=value file or a previous run's manifest.json")
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (falls back to $STABTUNE_SEED, then 0)")
    p.add_argument("--out", default="stabtune-out", help="output directory")
    p.add_argument("--grid-min", type=float, default=-2.0, help="log10 of the smallest λ")
    p.add_argument("--grid-max", type=float, default=2.0, help="log10 of the largest λ")
    p.add_argument("--grid-points", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.1, help="kappa threshold")
    p.add_argument("--splits", type=int, default=20, help="half-splits B for kappa")
    p.add_argument("--folds", type=int, default=10, help="CV folds")


def build_parser():
    parser = argparse.ArgumentParser(prog="stabtune", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="tune one penalized model on a CSV file")
    _add_common(p)
    p.add_argument("--data")
    p.add_argument("--response")
    p.add_argument("--penalty", type=_penalty, default="lasso")
    p.add_argument("--criterion", type=_criterion, default="kappa")
    p.add_argument("--ignore-columns", type=_list_of(str), default=[])

    p = sub.add_parser("simulate", help="run a simulation study")
    _add_common(p)
    p.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--penalties", type=_list_of(_penalty), default=list(PENALTIES))
    p.add_argument("--criteria", type=_list_of(_criterion), default=list(ALL_CRITERIA))
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sensitivity", help="mean RPE of the kappa criterion against alpha")
    _add_common(p)
    p.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--alphas", type=parse_alphas, default="0:0.30:0.01")
    p.add_argument("--penalty", type=_penalty, default="lasso")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("realdata", help="train/test comparison of every penalty and criterion")
    _add_common(p)
    p.add_argument("--data")
    p.add_argument("--response")
    p.add_argument("--train-size", type=int, default=67)
    p.add_argument("--split-column")
    p.add_argument("--repeats", type=int, default=1, help="number of random splits")
    p.add_argument("--penalties", type=_list_of(_penalty), default=list(PENALTIES))
    p.add_argument("--criteria", type=_list_of(_criterion), default=list(ALL_CRITERIA))
    p.add_argument("--ignore-columns", type=_list_of(str), default=[])
    return parser


def read_config(path):
    """Flag values from a manifest (JSON) or from ``key = value`` lines."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        values = json.loads(text).get("config", {})
    else:
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}: expected key=value, got {raw!r}")
            k, v = line.split("=", 1)
            values[k.strip()] = v.strip()
    out = {}
    for k, v in values.items():
        k = k.lstrip("-").replace("-", "_")
        if k in ("config", "command"):
            continue
        out[k] = ",".join(str(x) for x in v) if isinstance(v, list) else v
    return out


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = read_config(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        subparser.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("STABTUNE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"STABTUNE_SEED={env!r} is not an integer") from None


def _grid(args):
    if args.grid_points < 1 or args.grid_max < args.grid_min:
        raise UsageError("grid needs --grid-points >= 1 and --grid-max >= --grid-min")
    return log_grid(args.grid_min, args.grid_max, args.grid_points)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))


def _write_manifest(out, command, args, outputs, started):
    config = {k: v for k, v in vars(args).items() if k not in ("config",)}
    manifest = {
        "command": command,
        "config": config,
        "seed": args.seed,
        "version": __version__,
        "outputs": [str(Path(o).name) for o in outputs],
        "duration_seconds": round(time.time() - started, 3),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _names(ds, active):
    return [ds.column_names[j] for j in active]


def cmd_tune(args):
    _require(args, "data", "response")
    grid = _grid(args)
    ds = load_csv(args.data, args.response, ignore_columns=args.ignore_columns)
    tuned = tune(ds, PenaltySpec(args.penalty), grid, args.criterion,
                 stream(args.seed, 0, 1, ALL_CRITERIA.index(args.criterion),
                        PENALTIES.index(args.penalty)),
                 alpha=args.alpha, B=args.splits, folds=args.folds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    intercept, coef = tuned.prepared.to_original_scale(tuned.beta_refit)
    names = _names(ds, tuned.active)
    files = [out / "selection.csv", out / "coefficients.csv", out / "curve.csv"]
    write_csv(files[0], ("field", "value"), [
        ("penalty", args.penalty), ("criterion", args.criterion),
        ("lambda_hat", tuned.lambda_hat), ("active", ";".join(names)),
        ("n", ds.n), ("p", ds.p),
    ])
    write_csv(files[1], ("term", "coefficient"),
              [("(intercept)", intercept)] + list(zip(ds.column_names, coef)))
    value_name = "s_hat" if args.criterion == "kappa" else args.criterion
    write_csv(files[2], ("lambda", value_name), list(zip(grid, tuned.curve)))
    print(f"lambda_hat = {tuned.lambda_hat:.6g}")
    print(f"active set = {{{', '.join(names)}}}")
    return files


def _study_config(args):
    _require(args, "n")
    kw = dict(replicates=args.replicates, lambda_grid=tuple(_grid(args)), B=args.splits,
              alpha=args.alpha, seed=args.seed, folds=args.folds)
    if args.command == "simulate":
        kw.update(penalties=tuple(args.penalties), criteria=tuple(args.criteria))
    if args.scenario == 1:
        return scenario1_config(args.n, sigma=args.sigma, **kw)
    return scenario2_config(args.n, args.sigma, **kw)


def cmd_simulate(args):
    config = _study_config(args)
    report = run_study(config, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "replicates.csv", out / "aggregate.csv"]
    write_replicates_csv(report.rows, files[0])
    write_aggregate_csv(report.aggregates, files[1])
    for (crit, pen), a in sorted(report.aggregates.items(), key=lambda kv: kv[0][::-1]):
        print(f"{pen:>15} {crit:>6}  true={a.true_set:.2f}  C={a.mean_C:.2f}  "
              f"I={a.mean_I:.2f}  RPE(median)={a.rpe_median:.3f}")
    return files


def cmd_sensitivity(args):
    config = _study_config(args)
    alphas, means, per = alpha_sensitivity(config, args.alphas, args.penalty, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "sensitivity.csv"]
    ok = np.sum(~np.isnan(per), axis=0)
    write_csv(files[0], ("alpha", "mean_rpe", "replicates"), list(zip(alphas, means, ok)))
    for a, m in zip(alphas, means):
        print(f"alpha={a:.2f}  mean RPE={m:.4f}")
    return files


def realdata_rows(ds, splits, penalties, criteria, grid, seed, alpha, B, folds):
    """One row per (split, penalty, criterion) with test mean squared error."""
    rows = []
    for r, (train, test) in enumerate(splits):
        for pen in penalties:
            for crit in criteria:
                rng = stream(seed, r, 1, ALL_CRITERIA.index(crit), PENALTIES.index(pen))
                try:
                    tuned = tune(train, PenaltySpec(pen), grid, crit, rng, alpha=alpha, B=B,
                                 folds=folds)
                except StabtuneError as exc:
                    rows.append((r, pen, crit, float("nan"), "", "", float("nan"),
                                 f"{type(exc).__name__}: {exc}"))
                    continue
                pred = tuned.prepared.predict_original(tuned.beta_refit, test.X)
                pe = float(np.mean((test.y - pred) ** 2))
                rows.append((r, pen, crit, tuned.lambda_hat,
                             ";".join(_names(ds, tuned.active)),
                             ";".join(str(j + 1) for j in tuned.active), pe, ""))
    return rows


REALDATA_COLUMNS = ("split", "penalty", "criterion", "lambda_hat", "active", "active_index",
                    "test_pe", "error")


def cmd_realdata(args):
    _require(args, "data", "response")
    grid = _grid(args)
    ignore = list(args.ignore_columns) + ([args.split_column] if args.split_column else [])
    ds = load_csv(args.data, args.response, ignore_columns=ignore)
    if args.split_column:
        mask = load_split_column(args.data, args.split_column)
        if mask.all() or not mask.any():
            raise UsageError(f"split column {args.split_column!r} leaves an empty part")
        splits = [(ds.subset(np.flatnonzero(mask)), ds.subset(np.flatnonzero(~mask)))]
    else:
        if not 1 <= args.train_size < ds.n:
            raise UsageError(f"--train-size must be between 1 and {ds.n - 1}")
        if args.repeats < 1:
            raise UsageError("--repeats must be >= 1")
        splits = [train_test_split(ds, args.train_size, stream(args.seed, r, 0))
                  for r in range(args.repeats)]
    rows = realdata_rows(ds, splits, args.penalties, args.criteria, grid, args.seed,
                         args.alpha, args.splits, args.folds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "realdata.csv"]
    write_csv(files[0], REALDATA_COLUMNS, rows)
    if len(splits) == 1:
        for _, pen, crit, _, names, _, pe, err in rows:
            print(f"{pen:>15} {crit:>6}  PE={pe:.3f}  {{{names.replace(';', ', ')}}} {err}")
    return files


COMMANDS = {"tune": cmd_tune, "simulate": cmd_simulate, "sensitivity": cmd_sensitivity,
            "realdata": cmd_realdata}


def main(argv=None):
    started = time.time()
    try:
        args = _parse(argv)
        args.seed = _seed(args)
        files = COMMANDS[args.command](args)
        _write_manifest(Path(args.out), args.command, args, files, started)
    except UsageError as exc:
        print(f"stabtune: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except DataError as exc:
        print(f"stabtune: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"stabtune: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"stabtune: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except OSError as exc:
        print(f"stabtune: cannot read input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ARGS
    return 0


if __name__ == "__main__":
    sys.exit(main())
