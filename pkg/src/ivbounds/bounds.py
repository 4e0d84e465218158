"""Balke-Pearl bound algebra for a binary instrument/exposure/outcome.

Conditional cell probabilities are stored as arrays of shape (..., 2, 2, 2)
indexed ``pi[..., y, a, z] = P(Y=y, A=a | X, Z=z)``.  The two 8-vectors of
candidate bound values are linear in these cells, so both the plain bound
functions and their influence-function counterparts share one pair of
coefficient matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ThetaProfile",
    "theta_lower",
    "theta_upper",
    "theta_lower_linear",
    "theta_upper_linear",
    "theta_profile",
    "natural_bounds",
    "response_type_pi",
    "response_type_ate",
    "lp_sharp_bounds",
    "LOWER_CONSTANTS",
    "UPPER_CONSTANTS",
]

SIMPLEX_TOL = 1e-6

# Each row lists (y, a, z, sign) terms; constants are kept separately so the
# pure-linear part can be reused for influence-function contributions.
_LOWER_TERMS = [
    [(1, 1, 1, +1), (0, 0, 0, +1)],
    [(1, 1, 0, +1), (0, 0, 1, +1)],
    [(0, 1, 1, -1), (1, 0, 1, -1)],
    [(0, 1, 0, -1), (1, 0, 0, -1)],
    [(1, 1, 0, +1), (1, 1, 1, -1), (1, 0, 1, -1), (0, 1, 0, -1), (1, 0, 0, -1)],
    [(1, 1, 1, +1), (1, 1, 0, -1), (1, 0, 0, -1), (0, 1, 1, -1), (1, 0, 1, -1)],
    [(0, 0, 1, +1), (0, 1, 1, -1), (1, 0, 1, -1), (0, 1, 0, -1), (0, 0, 0, -1)],
    [(0, 0, 0, +1), (0, 1, 0, -1), (1, 0, 0, -1), (0, 1, 1, -1), (0, 0, 1, -1)],
]
LOWER_CONSTANTS = np.array([-1.0, -1.0, 0, 0, 0, 0, 0, 0])

_UPPER_TERMS = [
    [(0, 1, 1, -1), (1, 0, 0, -1)],
    [(0, 1, 0, -1), (1, 0, 1, -1)],
    [(1, 1, 1, +1), (0, 0, 1, +1)],
    [(1, 1, 0, +1), (0, 0, 0, +1)],
    [(0, 1, 0, -1), (0, 1, 1, +1), (0, 0, 1, +1), (1, 1, 0, +1), (0, 0, 0, +1)],
    [(0, 1, 1, -1), (1, 1, 1, +1), (0, 0, 1, +1), (0, 1, 0, +1), (0, 0, 0, +1)],
    [(1, 0, 1, -1), (1, 1, 1, +1), (0, 0, 1, +1), (1, 1, 0, +1), (1, 0, 0, +1)],
    [(1, 0, 0, -1), (1, 1, 0, +1), (0, 0, 0, +1), (1, 1, 1, +1), (1, 0, 1, +1)],
]
UPPER_CONSTANTS = np.array([1.0, 1.0, 0, 0, 0, 0, 0, 0])


def _coefficient_matrix(terms) -> np.ndarray:
    w = np.zeros((8, 8))
    for j, row in enumerate(terms):
        for y, a, z, sign in row:
            w[j, 4 * y + 2 * a + z] += sign
    return w


_W_LOWER = _coefficient_matrix(_LOWER_TERMS)
_W_UPPER = _coefficient_matrix(_UPPER_TERMS)


def _as_cells(pi: np.ndarray) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.shape[-3:] != (2, 2, 2):
        raise ValueError(f"pi must have trailing shape (2, 2, 2), got {pi.shape}")
    if not np.all(np.isfinite(pi)):
        raise ValueError("pi contains non-finite entries")
    return pi.reshape(pi.shape[:-3] + (8,))


def theta_lower_linear(pi: np.ndarray) -> np.ndarray:
    """Linear part of the lower-bound templates (constants dropped)."""
    return _as_cells(pi) @ _W_LOWER.T


def theta_upper_linear(pi: np.ndarray) -> np.ndarray:
    """Linear part of the upper-bound templates (constants dropped)."""
    return _as_cells(pi) @ _W_UPPER.T


def theta_lower(pi: np.ndarray) -> np.ndarray:
    """The 8 lower-bound candidate values, in display order (index 0 = first)."""
    return theta_lower_linear(pi) + LOWER_CONSTANTS


def theta_upper(pi: np.ndarray) -> np.ndarray:
    """The 8 upper-bound candidate values, in display order."""
    return theta_upper_linear(pi) + UPPER_CONSTANTS


@dataclass(frozen=True)
class ThetaProfile:
    """Candidate bound values with their extrema and selector indices.

    ``d_l``/``d_u`` are 1-based to match the display numbering; ties are
    broken toward the smallest index.
    """

    theta_l: np.ndarray
    theta_u: np.ndarray
    gamma_l: float | np.ndarray
    gamma_u: float | np.ndarray
    d_l: int | np.ndarray
    d_u: int | np.ndarray


def theta_profile(pi: np.ndarray) -> ThetaProfile:
    th_l = theta_lower(pi)
    th_u = theta_upper(pi)
    d_l = np.argmax(th_l, axis=-1)
    d_u = np.argmin(th_u, axis=-1)
    gamma_l = np.take_along_axis(th_l, d_l[..., None], axis=-1)[..., 0]
    gamma_u = np.take_along_axis(th_u, d_u[..., None], axis=-1)[..., 0]
    if th_l.ndim == 1:
        return ThetaProfile(th_l, th_u, float(gamma_l), float(gamma_u),
                            int(d_l) + 1, int(d_u) + 1)
    return ThetaProfile(th_l, th_u, gamma_l, gamma_u, d_l + 1, d_u + 1)


def natural_bounds(pi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Manski/Robins natural bounds; identical to the first candidate pair."""
    return theta_lower(pi)[..., 0], theta_upper(pi)[..., 0]


# ---------------------------------------------------------------------------
# Response-type oracle: the 16 joint compliance/outcome types.
# Type u = (a0, a1, y0, y1) with a0 = A(z=0), a1 = A(z=1), y_a = Y(a).
# Flat index = 8*a0 + 4*a1 + 2*y0 + y1.
# ---------------------------------------------------------------------------

RESPONSE_TYPES = np.array(list(itertools.product([0, 1], repeat=4)))


def response_type_pi(q: np.ndarray) -> np.ndarray:
    """Forward map from a response-type law to the observable cells.

    Under instrument value z the exposure is A(z) and the outcome Y(A(z)),
    so cell (y, a, z) collects the types with A(z) = a and Y(a) = y.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (16,):
        raise ValueError("q must be a 16-vector")
    pi = np.zeros((2, 2, 2))
    for u, (a0, a1, y0, y1) in enumerate(RESPONSE_TYPES):
        a_of_z = (a0, a1)
        y_of_a = (y0, y1)
        for z in (0, 1):
            a = a_of_z[z]
            pi[y_of_a[a], a, z] += q[u]
    return pi


def response_type_ate(q: np.ndarray) -> float:
    """ATE implied by a response-type law: E[Y(1) - Y(0)]."""
    effects = RESPONSE_TYPES[:, 3] - RESPONSE_TYPES[:, 2]
    return float(np.asarray(q, dtype=float) @ effects)


# Constraint system for the sharpness oracle.  Full system has rank 7: the
# total-mass row plus, per arm, three of the four cell rows (the fourth is
# implied by the per-arm simplex identity).
_KEPT_CELLS = [(y, a, z) for z in (0, 1) for (y, a) in [(0, 1), (1, 0), (1, 1)]]


def _constraint_matrix() -> np.ndarray:
    rows = [np.ones(16)]
    for y, a, z in _KEPT_CELLS:
        row = np.zeros(16)
        for u, (a0, a1, y0, y1) in enumerate(RESPONSE_TYPES):
            a_of_z = (a0, a1)
            y_of_a = (y0, y1)
            if a_of_z[z] == a and y_of_a[a] == y:
                row[u] = 1.0
        rows.append(row)
    return np.array(rows)


_BASIS_CACHE: dict[str, np.ndarray] | None = None


def _basis_data() -> dict[str, np.ndarray]:
    """Enumerate all nonsingular 7-column bases of the constraint system once."""
    global _BASIS_CACHE
    if _BASIS_CACHE is None:
        amat = _constraint_matrix()
        combos = np.array(list(itertools.combinations(range(16), 7)))
        blocks = amat[:, combos].transpose(1, 0, 2)  # (n_bases, 7, 7)
        dets = np.linalg.det(blocks)
        keep = np.abs(dets) > 1e-9
        effects = (RESPONSE_TYPES[:, 3] - RESPONSE_TYPES[:, 2]).astype(float)
        _BASIS_CACHE = {
            "inverses": np.linalg.inv(blocks[keep]),
            "effects": effects[combos[keep]],
        }
    return _BASIS_CACHE


def lp_sharp_bounds(pi: np.ndarray, tol: float = 1e-7):
    """Exact min/max of the ATE over response-type laws matching ``pi``.

    Enumerates the basic feasible solutions of the 7-equality linear system,
    so it is an oracle independent of the closed-form bound templates.
    Returns ``None`` when no law matches (an IV-model violation).
    """
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (2, 2, 2):
        raise ValueError("lp_sharp_bounds expects a single (2, 2, 2) law")
    if not np.all(np.isfinite(pi)):
        raise ValueError("pi contains non-finite entries")
    if np.any(np.abs(pi.sum(axis=(0, 1)) - 1.0) > tol):
        return None
    basis = _basis_data()
    b = np.concatenate([[1.0], [pi[y, a, z] for y, a, z in _KEPT_CELLS]])
    q = basis["inverses"] @ b
    feasible = np.all(q >= -tol, axis=1)
    if not np.any(feasible):
        return None
    values = np.einsum("ij,ij->i", basis["effects"][feasible], q[feasible])
    return float(values.min()), float(values.max())
