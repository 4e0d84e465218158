"""Simulation designs and verification experiments.

Two data-generating processes:

* the margin design, a one-sided-noncompliance law whose lower and upper
  bound functionals both equal 0 and whose candidate selection sits on the
  margin (several candidates tie at the optimum), stress-testing the hard
  selection step; and
* the illustration design, a four-stratum compliance-type law with a
  binary and a uniform covariate where covariate adjustment visibly
  narrows the bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import ThetaProfile, theta_profile
from .crossfit import ClosedFormNuisance, oracle_noisy_nuisance, rng_stream
from .data import Dataset
from .estimators import direct_bounds, plugin_bounds, wald_interval
from .lse import LseConfig, conservative_interval, lse_bounds

__all__ = [
    "gen_margin",
    "margin_truth",
    "gen_illustration",
    "illustration_pi",
    "illustration_lambda1",
    "illustration_truth",
    "rmse_experiment",
    "coverage_experiment",
    "width_comparison",
    "MARGIN_H",
]

MARGIN_H = 2.25


# ---------------------------------------------------------------------------
# Margin design: X ~ U(0,1), Z ~ Bern(clip(x^2, .1, .9)), perfect compliance
# A = Z, U ~ U(0,1), Y = 1(U < A(1-X) + (1-A)X).  Both bound functionals are
# exactly 0 and the per-row optimum is attained by multiple candidates.

def _margin_lambda1(x):
    return np.clip(x[:, 0] ** 2, 0.10, 0.90)


def _margin_pi(x):
    v = x[:, 0]
    pi = np.zeros((len(v), 2, 2, 2))
    pi[:, 0, 0, 0] = 1.0 - v / 2.0        # z=0: A=0, Y ~ Bern(x/2)
    pi[:, 1, 0, 0] = v / 2.0
    pi[:, 0, 1, 1] = 1.0 - (1.0 - v) / 2.0  # z=1: A=1, Y ~ Bern((1-x)/2)
    pi[:, 1, 1, 1] = (1.0 - v) / 2.0
    return pi


_MARGIN_ZEROS = np.ones((2, 2, 2), dtype=bool)
for _y in (0, 1):
    _MARGIN_ZEROS[_y, 0, 0] = False
    _MARGIN_ZEROS[_y, 1, 1] = False


def margin_truth() -> ClosedFormNuisance:
    return ClosedFormNuisance(_margin_lambda1, _margin_pi, _MARGIN_ZEROS)


def gen_margin(n: int, seed: int) -> Dataset:
    rng = rng_stream(seed, 10)
    x = rng.random((n, 1))
    lam1 = _margin_lambda1(x)
    z = (rng.random(n) < lam1).astype(int)
    a = z
    u = rng.random(n)
    y = (rng.random(n) < u * (a * (1.0 - x[:, 0]) + (1 - a) * x[:, 0])).astype(float)
    return Dataset(x=x, z=z, a=a, y=y, colnames=["x"])


# ---------------------------------------------------------------------------
# Illustration design.  Z ~ Bern(1/2); X1 ~ Bern(0.7); X2 ~ U(-1, 1).
# Compliance strata from (X1, X2): always-takers when X2 >= 0.99,
# never-takers when X2 <= -0.99, defiers when X1 = 0 and X2 in (-0.5, 0.5],
# compliers otherwise.  Outcome means by (stratum, exposure):

_ILLU_BETA = {
    "AT": (0.20, 0.35),
    "NT": (0.90, 0.95),
    "DE": (0.65, 0.725),
    "CO": (0.25, 0.375),
}


def _strata(x1, x2, appendix_compat=False):
    """Stratum label per row; compat mode drops the tail strata entirely."""
    s = np.full(len(x1), "CO", dtype="<U2")
    if not appendix_compat:
        s[x2 >= 0.99] = "AT"
        s[x2 <= -0.99] = "NT"
    defier = (x1 == 0) & (x2 > -0.5) & (x2 <= 0.5)
    keep = (s == "CO")
    s[keep & defier] = "DE"
    return s


def gen_illustration(n: int, seed: int, appendix_compat: bool = False) -> Dataset:
    rng = rng_stream(seed, 11)
    z = (rng.random(n) < 0.5).astype(int)
    x1 = (rng.random(n) < 0.7).astype(int)
    x2 = rng.uniform(-1.0, 1.0, n)
    s = _strata(x1, x2, appendix_compat)
    a = np.where(s == "AT", 1, np.where(s == "NT", 0,
                 np.where(s == "DE", 1 - z, z)))
    beta = np.array([_ILLU_BETA[k] for k in s])
    p = beta[np.arange(n), a]
    y = (rng.random(n) < p).astype(float)
    return Dataset(x=np.column_stack([x1, x2]).astype(float), z=z,
                   a=a.astype(int), y=y, colnames=["x1", "x2"])


def illustration_lambda1(x):
    return np.full(np.atleast_2d(x).shape[0], 0.5)


def _stratum_weights(x, appendix_compat=False):
    """Row-wise probability of each stratum given covariates (AT, NT, DE, CO)."""
    x = np.atleast_2d(x)
    s = _strata(x[:, 0].astype(int), x[:, 1], appendix_compat)
    w = np.zeros((len(s), 4))
    for j, k in enumerate(("AT", "NT", "DE", "CO")):
        w[:, j] = s == k
    return w


def illustration_pi(x, appendix_compat: bool = False):
    """Closed-form joint cells; strata are deterministic in the covariates."""
    w = _stratum_weights(x, appendix_compat)
    pi = np.zeros((len(w), 2, 2, 2))
    for j, k in enumerate(("AT", "NT", "DE", "CO")):
        b0, b1 = _ILLU_BETA[k]
        for z in (0, 1):
            if k == "AT":
                a = 1
            elif k == "NT":
                a = 0
            elif k == "DE":
                a = 1 - z
            else:
                a = z
            p = (b0, b1)[a]
            pi[:, 1, a, z] += w[:, j] * p
            pi[:, 0, a, z] += w[:, j] * (1.0 - p)
    return pi


def illustration_truth(n_grid: int = 200_001, appendix_compat: bool = False) -> dict:
    """Exact functionals by integrating the closed-form law over (X1, X2)."""
    x2 = np.linspace(-1.0, 1.0, n_grid)
    out = {"lower": 0.0, "upper": 0.0, "ate": 0.0}
    for x1, px1 in ((0, 0.3), (1, 0.7)):
        x = np.column_stack([np.full(n_grid, float(x1)), x2])
        prof = theta_profile(illustration_pi(x, appendix_compat))
        out["lower"] += px1 * np.mean(prof.gamma_l)
        out["upper"] += px1 * np.mean(prof.gamma_u)
        w = _stratum_weights(x, appendix_compat)
        cate = np.array([b1 - b0 for (b0, b1) in
                         (_ILLU_BETA[k] for k in ("AT", "NT", "DE", "CO"))])
        out["ate"] += px1 * np.mean(w @ cate)
    return out


# ---------------------------------------------------------------------------
# Experiments.

def rmse_experiment(n_grid, r_grid, reps: int, seed: int,
                    h: float = MARGIN_H) -> list[dict]:
    """RMSE of direct, smooth, and plug-in estimators on the margin design.

    Nuisances are the closed-form truth perturbed on the logit scale by one
    N(h n^-r, h^2 n^-2r) draw per function, giving nuisance error of order
    n^-r.  True lower and upper bounds are both 0.
    """
    truth = margin_truth()
    rows = []
    for n in n_grid:
        for r in r_grid:
            errs = {m: [] for m in ("direct", "lse", "plugin")}
            for rep in range(reps):
                data = gen_margin(n, seed + 1000 * rep)
                nuis = oracle_noisy_nuisance(truth, n, r, h, seed + 1000 * rep + 7)
                lam1, pi = nuis.evaluate(data)
                for name, est in (
                    ("direct", direct_bounds(data, lam1, pi)),
                    ("lse", lse_bounds(data, lam1, pi,
                                       LseConfig("simulation", h=h, r=r))),
                    ("plugin", plugin_bounds(data, lam1, pi)),
                ):
                    errs[name].append((est.lower, est.upper))
            row = {"n": n, "r": r, "reps": reps}
            for name, pairs in errs.items():
                arr = np.asarray(pairs)
                row[f"rmse_lower_{name}"] = float(np.sqrt(np.mean(arr[:, 0] ** 2)))
                row[f"rmse_upper_{name}"] = float(np.sqrt(np.mean(arr[:, 1] ** 2)))
                row[f"bias_lower_{name}"] = float(np.mean(arr[:, 0]))
                row[f"bias_upper_{name}"] = float(np.mean(arr[:, 1]))
            rows.append(row)
    return rows


def coverage_experiment(n: int, reps: int, r: float, seed: int,
                        h: float = MARGIN_H, alpha: float = 0.05) -> dict:
    """Coverage of [L, U] = [0, 0] by the direct and smoothed-conservative CIs."""
    truth = margin_truth()
    hit_direct = hit_lse = 0
    for rep in range(reps):
        data = gen_margin(n, seed + 1000 * rep)
        nuis = oracle_noisy_nuisance(truth, n, r, h, seed + 1000 * rep + 7)
        lam1, pi = nuis.evaluate(data)
        lo, hi = wald_interval(direct_bounds(data, lam1, pi), alpha)
        hit_direct += lo <= 0.0 <= hi
        lo, hi = conservative_interval(
            lse_bounds(data, lam1, pi, LseConfig("simulation", h=h, r=r)), alpha)
        hit_lse += lo <= 0.0 <= hi
    return {"n": n, "reps": reps, "r": r,
            "coverage_direct": hit_direct / reps,
            "coverage_lse": hit_lse / reps}


def _marginal_pi_over_x1(x, appendix_compat=False):
    """Joint cells adjusting for X2 only, averaging X1 out at P(X1=1)=0.7."""
    x = np.atleast_2d(x)
    x1 = np.column_stack([np.ones(len(x)), x[:, -1]])
    x0 = np.column_stack([np.zeros(len(x)), x[:, -1]])
    return (0.7 * illustration_pi(x1, appendix_compat)
            + 0.3 * illustration_pi(x0, appendix_compat))


def width_comparison(appendix_compat: bool = False, n_grid: int = 200_001) -> dict:
    """Population bound widths under no, partial, and full covariate adjustment."""
    x2 = np.linspace(-1.0, 1.0, n_grid)
    out = {}
    # Full adjustment (X1, X2) and no adjustment fall out of the same grid.
    full_l = full_u = 0.0
    pooled = np.zeros((2, 2, 2))
    for x1, px1 in ((0, 0.3), (1, 0.7)):
        x = np.column_stack([np.full(n_grid, float(x1)), x2])
        pi = illustration_pi(x, appendix_compat)
        prof = theta_profile(pi)
        full_l += px1 * np.mean(prof.gamma_l)
        full_u += px1 * np.mean(prof.gamma_u)
        pooled += px1 * np.mean(pi, axis=0)
    prof = theta_profile(pooled[None])
    part = theta_profile(_marginal_pi_over_x1(np.column_stack(
        [np.zeros(n_grid), x2]), appendix_compat))
    out["none"] = (float(prof.gamma_l[0]), float(prof.gamma_u[0]))
    out["x2_only"] = (float(np.mean(part.gamma_l)), float(np.mean(part.gamma_u)))
    out["full"] = (full_l, full_u)
    return out
