"""Core types and entrywise primitives shared by every solver.

Couplings are plain float64 numpy arrays; marginals are validated 1-d
probability vectors. Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConfigurationError(ValueError):
    """A parameter set is incomplete or inconsistent for the requested mode."""


class DegenerateIterateError(RuntimeError):
    """An iterate developed a zero row/column/mode sum and cannot be rescaled."""


class OracleError(RuntimeError):
    """A gradient oracle returned non-finite or mis-shaped values."""


MARGINAL_SUM_TOL = 1e-12


def as_marginal(values) -> np.ndarray:
    """Validate a probability vector and return it as a float64 array.

    Entries must be strictly positive (a zero would make the log-radius
    infinite and pin permanent zeros into multiplicative iterates) and sum
    to 1 within ``MARGINAL_SUM_TOL``; vectors inside the tolerance are
    renormalized by their sum so text-formatted inputs round-trip cleanly.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"marginal must be a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("marginal has non-finite entries")
    if np.any(v <= 0.0):
        raise ValueError("marginal entries must be strictly positive")
    total = v.sum()
    if abs(total - 1.0) > MARGINAL_SUM_TOL:
        raise ValueError(f"marginal entries sum to {total!r}, expected 1 within {MARGINAL_SUM_TOL}")
    return v / total


@dataclass(frozen=True)
class TransportPolytope:
    """Couplings with prescribed row and column marginals.

    The feasible set is all nonnegative ``(m, n)`` matrices whose rows sum
    to ``row_marginal`` and whose columns sum to ``col_marginal``.
    """

    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_marginal", as_marginal(self.row_marginal))
        object.__setattr__(self, "col_marginal", as_marginal(self.col_marginal))

    @property
    def shape(self) -> tuple[int, int]:
        return self.row_marginal.size, self.col_marginal.size


def independent_coupling(polytope: TransportPolytope) -> np.ndarray:
    """Outer product of the two marginals; the product coupling."""
    return np.outer(polytope.row_marginal, polytope.col_marginal)


def constraint_violation(gamma: np.ndarray, polytope: TransportPolytope) -> float:
    """l1 distance of both marginals of ``gamma`` from their targets, summed."""
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.shape != polytope.shape:
        raise ValueError(f"coupling shape {gamma.shape} does not match polytope {polytope.shape}")
    row_gap = np.abs(gamma.sum(axis=1) - polytope.row_marginal).sum()
    col_gap = np.abs(gamma.sum(axis=0) - polytope.col_marginal).sum()
    return float(row_gap + col_gap)


def entropic_radius(polytope: TransportPolytope) -> float:
    """Max-absolute-log of each marginal, summed.

    Upper-bounds the relative entropy from the product coupling to any
    feasible plan, and calibrates every step-size rule in this package.
    """
    return _log_radius(polytope.row_marginal) + _log_radius(polytope.col_marginal)


def _log_radius(marginal: np.ndarray) -> float:
    return float(np.abs(np.log(marginal)).max())


def kl_divergence(a: np.ndarray, b: np.ndarray) -> float:
    """Relative entropy ``<a, log a - log b> + <b - a, 1>``, with 0 log 0 = 0.

    Generalized to unnormalized nonnegative inputs via the linear
    mass-correction term; ``b`` must be positive wherever ``a`` is.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if np.any(a < 0.0):
        raise ValueError("first argument has negative entries")
    if np.any(b[a > 0.0] <= 0.0):
        raise ValueError("second argument vanishes where the first is positive")
    pos = a > 0.0
    log_ratio = np.zeros_like(a)
    log_ratio[pos] = np.log(a[pos]) - np.log(b[pos])
    return float((a * log_ratio).sum() + (b.sum() - a.sum()))


def negative_entropy(gamma: np.ndarray) -> float:
    """``<gamma, log gamma>`` with the 0 log 0 = 0 convention."""
    gamma = np.asarray(gamma, dtype=np.float64)
    pos = gamma > 0.0
    return float((gamma[pos] * np.log(gamma[pos])).sum())


def row_normalize(gamma: np.ndarray, row_marginal: np.ndarray) -> np.ndarray:
    """Rescale each row of ``gamma`` so row ``i`` sums to ``row_marginal[i]``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    sums = gamma.sum(axis=1)
    if not np.all(sums > 0.0):
        raise DegenerateIterateError("row sum vanished; cannot rescale")
    return gamma * (np.asarray(row_marginal) / sums)[:, None]


def col_normalize(gamma: np.ndarray, col_marginal: np.ndarray) -> np.ndarray:
    """Rescale each column of ``gamma`` so column ``j`` sums to ``col_marginal[j]``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    sums = gamma.sum(axis=0)
    if not np.all(sums > 0.0):
        raise DegenerateIterateError("column sum vanished; cannot rescale")
    return gamma * (np.asarray(col_marginal) / sums)[None, :]
