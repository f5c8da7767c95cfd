"""Projection of a nonnegative matrix onto a transport polytope.

Caps row scalings at 1, then column scalings at 1, then fills the remaining
marginal deficit with a rank-one nonnegative correction. The l1 movement is
at most twice the input's constraint violation, and the runtime is linear
in the matrix size.
"""

from __future__ import annotations

import numpy as np

from .core import TransportPolytope

# Residual l1 norms below this are floating-point noise; the rank-one term
# would be 0/0 there, so the capped matrix is returned as-is.
RESIDUAL_FLOOR = 1e-15


def _cap_rows(gamma: np.ndarray, row_marginal: np.ndarray) -> np.ndarray:
    sums = gamma.sum(axis=1)
    with np.errstate(divide="ignore"):
        scale = np.minimum(np.where(sums > 0.0, row_marginal / sums, 1.0), 1.0)
    return gamma * scale[:, None]


def _cap_cols(gamma: np.ndarray, col_marginal: np.ndarray) -> np.ndarray:
    sums = gamma.sum(axis=0)
    with np.errstate(divide="ignore"):
        scale = np.minimum(np.where(sums > 0.0, col_marginal / sums, 1.0), 1.0)
    return gamma * scale[None, :]


def round_to_polytope(gamma: np.ndarray, polytope: TransportPolytope) -> np.ndarray:
    """Return the nearest-in-l1-order feasible plan built from ``gamma``.

    The input must be nonnegative and not identically zero. The output has
    the polytope's exact marginals, never exceeds the capped input
    entrywise before the rank-one fill, and satisfies
    ``l1(result - gamma) <= 2 * constraint_violation(gamma)``.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.shape != polytope.shape:
        raise ValueError(f"shape {gamma.shape} does not match polytope {polytope.shape}")
    if np.any(gamma < 0.0) or not np.all(np.isfinite(gamma)):
        raise ValueError("input must be nonnegative and finite")
    if not np.any(gamma > 0.0):
        raise ValueError("input is identically zero")

    capped = _cap_cols(_cap_rows(gamma, polytope.row_marginal), polytope.col_marginal)
    # Both residuals are nonnegative after capping; clamp away rounding noise
    # so the rank-one fill cannot create negative entries.
    row_gap = np.maximum(polytope.row_marginal - capped.sum(axis=1), 0.0)
    gap_mass = row_gap.sum()
    if gap_mass < RESIDUAL_FLOOR:
        return capped
    col_gap = np.maximum(polytope.col_marginal - capped.sum(axis=0), 0.0)
    return capped + np.outer(row_gap / gap_mass, col_gap)
