"""Command-line interface: bounds estimation, simulation, illustration, checks.

Subcommands
-----------
bounds      estimate ATE bounds from a CSV file and emit a JSON report
simulate    run the margin-design RMSE experiment grid (JSON + long CSV)
illustrate  emit the illustration design's true and estimated quantities
check       run the LP-tightness oracle and core property suite
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import json
import sys

import numpy as np

from . import __version__
from .bounds import lp_sharp_bounds, natural_bounds, theta_profile
from .continuous import continuous_bounds
from .crossfit import DEFAULT_EPS, DEFAULT_FOLDS, cross_fit, rng_stream
from .data import ColumnMapping, LoadError, load_csv
from .estimators import direct_bounds, wald_interval
from .learners import FitError, parse_learner_spec
from .lse import LseConfig, conservative_interval, lse_bounds
from .simulation import (gen_illustration, illustration_truth, rmse_experiment,
                         width_comparison)

__all__ = ["main", "build_parser"]

REPORT_SCHEMA_VERSION = 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ivbounds",
                                description="Nonparametric instrument-based ATE bounds")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="estimate bounds from a CSV file")
    b.add_argument("input", help="CSV file with a header row")
    b.add_argument("--covariates", required=True,
                   help="comma-separated covariate column names")
    b.add_argument("--instrument", required=True)
    b.add_argument("--exposure", required=True)
    b.add_argument("--outcome", required=True)
    b.add_argument("--weights-col", default=None)
    b.add_argument("--method", choices=["direct", "lse", "continuous"],
                   default="direct")
    b.add_argument("--learner-pi", default="histogram",
                   help="joint-cell learner spec, e.g. histogram, knn:50, softmax")
    b.add_argument("--learner-lambda", default="histogram",
                   help="propensity learner spec; known:<p> for a known design")
    b.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    b.add_argument("--eps", type=float, default=DEFAULT_EPS,
                   help="propensity truncation level")
    b.add_argument("--t", type=float, default=None,
                   help="fixed smoothing temperature (lse only)")
    b.add_argument("--t-rule", choices=["fixed", "data-analysis", "simulation"],
                   default="data-analysis")
    b.add_argument("--m", type=int, default=20,
                   help="threshold replicates (continuous only)")
    b.add_argument("--delta", type=float, default=0.05,
                   help="interval miscoverage level")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--clamp", action="store_true",
                   help="clamp reported bounds into [-1, 1]")
    b.add_argument("--threads", type=int, default=1,
                   help="worker concurrency cap")
    b.add_argument("--output", default=None, help="write JSON here instead of stdout")

    s = sub.add_parser("simulate", help="margin-design RMSE experiment")
    s.add_argument("--n-grid", default="500,1000,5000")
    s.add_argument("--r-grid", default=",".join(
        f"{0.10 + 0.05 * k:.2f}" for k in range(9)))
    s.add_argument("--reps", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--output", default=None, help="JSON output path")
    s.add_argument("--csv", default=None, help="long-format CSV output path")

    i = sub.add_parser("illustrate", help="illustration-design truth and estimates")
    i.add_argument("--n", type=int, default=5000)
    i.add_argument("--folds", type=int, default=10)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--delta", type=float, default=0.05)
    i.add_argument("--learner-pi", default="histogram")
    i.add_argument("--learner-lambda", default="known:0.5")
    i.add_argument("--appendix-f-compat", action="store_true",
                   help="drop the always/never-taker strata as in the published script")
    i.add_argument("--output", default=None)

    c = sub.add_parser("check", help="run the tightness oracle and property suite")
    c.add_argument("--laws", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=1e-8)
    return p


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, default=_jsonable)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _resolved_config(args) -> dict:
    skip = {"command", "output", "csv"}
    return {k.replace("_", "-"): v for k, v in vars(args).items() if k not in skip}


def _report(est, interval, args, diagnostics) -> dict:
    lo, hi = interval
    lower, upper = est.lower, est.upper
    warnings = []
    if est.crossed:
        warnings.append("estimated lower bound exceeds estimated upper bound")
    if args.clamp:
        lower, upper = max(lower, -1.0), min(upper, 1.0)
        lo, hi = max(lo, -1.0), min(hi, 1.0)
    freqs = est.selection_frequencies()
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "software_version": __version__,
        "method": est.method,
        "method_metadata": est.extra,
        "n": est.n,
        "lower": lower,
        "upper": upper,
        "var_lower": est.var_lower,
        "var_upper": est.var_upper,
        "interval": {"lo": lo, "hi": hi, "level": 1.0 - args.delta},
        "selection_frequencies": None if freqs is None else {
            "lower": freqs["lower"].tolist(),
            "upper": freqs["upper"].tolist(),
        },
        "diagnostics": diagnostics,
        "seed": args.seed,
        "config": _resolved_config(args),
        "warnings": warnings,
    }


def _cmd_bounds(args) -> int:
    mapping = ColumnMapping(
        covariates=[c for c in args.covariates.split(",") if c],
        instrument=args.instrument, exposure=args.exposure,
        outcome=args.outcome, weight=args.weights_col)
    outcome_kind = "bounded-continuous" if args.method == "continuous" else "binary"
    data = load_csv(args.input, mapping, outcome_kind)
    pi_spec = parse_learner_spec(args.learner_pi)
    lam_spec = parse_learner_spec(args.learner_lambda)
    lse_config = LseConfig(args.t_rule, t=args.t)
    if args.t is not None and args.method != "lse":
        raise ValueError("--t applies only to --method lse")
    if args.t is not None and args.t_rule != "fixed":
        raise ValueError("--t requires --t-rule fixed")

    if args.method == "continuous":
        def factory(aug):
            return cross_fit(aug, args.folds, pi_spec, lam_spec,
                             args.seed, args.eps)
        est = continuous_bounds(data, factory, args.m, args.seed)
        interval = wald_interval(est, args.delta)
        diagnostics = {"outcome_scale": est.extra["scale"]}
    else:
        nuis = cross_fit(data, args.folds, pi_spec, lam_spec, args.seed, args.eps)
        lam1, pi = nuis.evaluate(data)
        cell_sums = pi.sum(axis=(1, 2))
        diagnostics = {
            "propensity_range": [float(lam1.min()), float(lam1.max())],
            "simplex_max_violation": float(np.abs(cell_sums - 1.0).max()),
            "nuisance": nuis.descriptor,
        }
        if args.method == "lse":
            est = lse_bounds(data, lam1, pi, lse_config)
            interval = conservative_interval(est, args.delta)
        else:
            est = direct_bounds(data, lam1, pi)
            interval = wald_interval(est, args.delta)
    _emit(_report(est, interval, args, diagnostics), args.output)
    return 0


def _cmd_simulate(args) -> int:
    n_grid = [int(v) for v in args.n_grid.split(",")]
    r_grid = [float(v) for v in args.r_grid.split(",")]
    rows = rmse_experiment(n_grid, r_grid, args.reps, args.seed)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv_mod.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    _emit({"schema_version": REPORT_SCHEMA_VERSION,
           "software_version": __version__,
           "experiment": "margin-rmse", "rows": rows,
           "config": _resolved_config(args)}, args.output)
    return 0


def _cmd_illustrate(args) -> int:
    truth = illustration_truth(appendix_compat=args.appendix_f_compat)
    widths = width_comparison(args.appendix_f_compat)
    data = gen_illustration(args.n, args.seed, args.appendix_f_compat)
    nuis = cross_fit(data, args.folds, parse_learner_spec(args.learner_pi),
                     parse_learner_spec(args.learner_lambda), args.seed)
    lam1, pi = nuis.evaluate(data)
    est = direct_bounds(data, lam1, pi)
    lo, hi = wald_interval(est, args.delta)
    _emit({
        "schema_version": REPORT_SCHEMA_VERSION,
        "software_version": __version__,
        "truth": {k: float(v) for k, v in truth.items()},
        "population_bounds_by_adjustment": {
            k: list(v) for k, v in widths.items()},
        "estimate": {"lower": est.lower, "upper": est.upper,
                     "interval": {"lo": lo, "hi": hi, "level": 1.0 - args.delta},
                     "n": est.n},
        "seed": args.seed,
        "config": _resolved_config(args),
    }, args.output)
    return 0


def _cmd_check(args) -> int:
    rng = rng_stream(args.seed, 99)
    worst = 0.0
    failures = []
    for i in range(args.laws):
        q = rng.dirichlet(np.ones(16))
        from .bounds import response_type_ate, response_type_pi
        pi = response_type_pi(q)
        prof = theta_profile(pi[None])
        lp = lp_sharp_bounds(pi)
        if lp is None:
            failures.append(f"law {i}: oracle reported infeasible")
            continue
        gl, gu = float(prof.gamma_l[0]), float(prof.gamma_u[0])
        worst = max(worst, abs(gl - lp[0]), abs(gu - lp[1]))
        ate = response_type_ate(q)
        if not gl - 1e-9 <= ate <= gu + 1e-9:
            failures.append(f"law {i}: ATE {ate} outside [{gl}, {gu}]")
        bl, bu = natural_bounds(pi[None])
        if not (bl[0] - 1e-12 <= gl and gu <= bu[0] + 1e-12):
            failures.append(f"law {i}: sharp bounds escape the natural bounds")
    ok = worst <= args.tol and not failures
    print(json.dumps({
        "laws": args.laws,
        "max_lp_gap": worst,
        "tolerance": args.tol,
        "failures": failures[:20],
        "ok": ok,
    }, indent=2))
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "illustrate":
            return _cmd_illustrate(args)
        return _cmd_check(args)
    except LoadError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io-error", "message": str(exc)}), file=sys.stderr)
        return 2
    except (FitError, ValueError) as exc:
        code = "fit-error" if isinstance(exc, FitError) else "invalid-config"
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
