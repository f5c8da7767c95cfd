"""Objective functions and gradient oracles for transport-polytope problems.

Deterministic objectives bundle a value and a gradient plus whatever
curvature constants they can declare honestly. Stochastic constructors wrap
a base objective into a seeded ``GradientOracle`` whose mean matches the
true gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import TransportPolytope, constraint_violation
from .solver import GradientOracle


@dataclass
class Objective:
    """A differentiable convex function of a coupling.

    ``lipschitz_bound`` bounds the gradient sup-norm where declared;
    ``strong_convexity`` and ``smoothness`` are moduli relative to the
    entropy geometry; ``optimum_value`` is set by constructions whose
    constrained minimum is known in closed form.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float | None = None
    strong_convexity: float | None = None
    smoothness: float | None = None
    optimum_value: float | None = None

    def as_oracle(self) -> GradientOracle:
        """Deterministic oracle ignoring the step index."""
        return GradientOracle(fn=lambda t, gamma: self.gradient(gamma),
                              lipschitz_bound=self.lipschitz_bound or math.nan,
                              noise_bound=0.0, deterministic=True)


def linear_objective(cost: np.ndarray) -> Objective:
    """<cost, gamma>; the optimal-transport objective."""
    cost = np.asarray(cost, dtype=np.float64)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix has non-finite entries")
    return Objective(
        value=lambda gamma: float((cost * gamma).sum()),
        gradient=lambda gamma: cost,
        lipschitz_bound=float(np.abs(cost).max()),
    )


def entropic_ot_objective(cost: np.ndarray, alpha: float) -> Objective:
    """<cost, gamma> plus alpha * <gamma, log gamma>.

    Strongly convex and smooth with both moduli equal to ``alpha`` in the
    entropy geometry. The gradient needs strictly positive entries.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")

    def value(gamma):
        gamma = np.asarray(gamma)
        pos = gamma > 0.0
        return float((cost * gamma).sum() + alpha * (gamma[pos] * np.log(gamma[pos])).sum())

    def gradient(gamma):
        gamma = np.asarray(gamma)
        if np.any(gamma <= 0.0):
            raise ValueError("entropic gradient undefined at zero entries")
        return cost + alpha * (np.log(gamma) + 1.0)

    return Objective(value=value, gradient=gradient,
                     strong_convexity=alpha, smoothness=alpha)


def procrustes_objective(k_x: np.ndarray, k_y: np.ndarray, lam: float = 0.0) -> Objective:
    """Squared commutation residual of two similarity matrices under a coupling.

    value(gamma) = ||k_x gamma - gamma k_y||_F^2 - lam ||gamma||_F^2. Convex
    for small enough ``lam``; the threshold depends on the spectra of the
    two matrices and is not certified here.
    """
    k_x = np.asarray(k_x, dtype=np.float64)
    k_y = np.asarray(k_y, dtype=np.float64)
    if k_x.ndim != 2 or k_x.shape[0] != k_x.shape[1]:
        raise ValueError(f"k_x must be square, got {k_x.shape}")
    if k_y.ndim != 2 or k_y.shape[0] != k_y.shape[1]:
        raise ValueError(f"k_y must be square, got {k_y.shape}")
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")

    def residual(gamma):
        return k_x @ gamma - gamma @ k_y

    def value(gamma):
        r = residual(gamma)
        return float((r * r).sum() - lam * (gamma * gamma).sum())

    def gradient(gamma):
        r = residual(gamma)
        return 2.0 * (k_x.T @ r) - 2.0 * (r @ k_y.T) - 2.0 * lam * gamma

    return Objective(value=value, gradient=gradient)


def marginal_regularized(base: Objective, polytope: TransportPolytope,
                         weight: float) -> Objective:
    """Add squared-distance penalties pulling both marginals to their targets.

    The penalty gradients vanish exactly on the feasible set, so solver
    iterates coincide with the unregularized run; the wrapper exists to make
    that invariance executable.
    """
    if weight <= 0.0:
        raise ValueError("weight must be positive")
    mu, nu = polytope.row_marginal, polytope.col_marginal

    def value(gamma):
        row_gap = gamma.sum(axis=1) - mu
        col_gap = gamma.sum(axis=0) - nu
        return base.value(gamma) + weight * float((row_gap**2).sum() + (col_gap**2).sum())

    def gradient(gamma):
        row_gap = gamma.sum(axis=1) - mu
        col_gap = gamma.sum(axis=0) - nu
        return (base.gradient(gamma)
                + 2.0 * weight * row_gap[:, None]
                + 2.0 * weight * col_gap[None, :])

    return Objective(value=value, gradient=gradient,
                     lipschitz_bound=base.lipschitz_bound,
                     strong_convexity=base.strong_convexity,
                     smoothness=base.smoothness,
                     optimum_value=base.optimum_value)


def planted_strongly_convex(polytope: TransportPolytope, gamma_star: np.ndarray,
                            alpha: float = 1.0) -> Objective:
    """Entropic objective whose constrained minimizer is the given interior plan.

    Built as <-alpha log(gamma_star), gamma> + alpha <gamma, log gamma>, so
    the gap value(gamma) - value(gamma_star) is exactly alpha times the
    relative entropy from gamma to gamma_star, the minimum value is 0, and
    the gradient at the minimizer is the constant matrix alpha.
    """
    gamma_star = np.asarray(gamma_star, dtype=np.float64)
    if np.any(gamma_star <= 0.0):
        raise ValueError("planted minimizer must have strictly positive entries")
    if constraint_violation(gamma_star, polytope) > 1e-9:
        raise ValueError("planted minimizer is not feasible for the polytope")
    obj = entropic_ot_objective(-alpha * np.log(gamma_star), alpha)
    obj.lipschitz_bound = alpha  # sup-norm of the gradient at the minimizer
    obj.optimum_value = 0.0
    return obj


def subsampled_oracle(base: Objective, sample_size: int, seed: int,
                      num_entries: int | None = None) -> GradientOracle:
    """Unbiased sparse-support estimator of the base gradient.

    Each call draws ``sample_size`` distinct entries uniformly and rescales
    them by (num_entries / sample_size); averaging over draws recovers the
    full gradient. Pass ``num_entries`` (the coupling's entry count) to get
    a declared noise bound: the worst-case sup-norm deviation
    max(num_entries/sample_size - 1, 1) times the base Lipschitz bound,
    loose but honest.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    rng = np.random.default_rng(seed)

    def fn(t, gamma):
        g = base.gradient(gamma)
        total = g.size
        if sample_size > total:
            raise ValueError(f"sample_size {sample_size} exceeds entry count {total}")
        if sample_size == total:
            return g
        flat = np.zeros(total, dtype=np.float64)
        idx = rng.choice(total, size=sample_size, replace=False)
        flat[idx] = (total / sample_size) * g.reshape(-1)[idx]
        return flat.reshape(g.shape)

    b = base.lipschitz_bound if base.lipschitz_bound is not None else math.nan
    if num_entries is None or math.isnan(b):
        noise = math.nan
    elif sample_size >= num_entries:
        noise = 0.0
    else:
        noise = max(num_entries / sample_size - 1.0, 1.0) * b
    return GradientOracle(fn=fn, lipschitz_bound=b, noise_bound=noise,
                          deterministic=False)


def noisy_oracle(base: Objective, sigma: float, seed: int) -> GradientOracle:
    """Base gradient plus sigma times an entrywise uniform [-1, 1] matrix.

    The perturbation has sup-norm at most 1 almost surely, so its sup-norm
    second moment is at most 1 and the declared noise bound is exactly
    ``sigma``.
    """
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)

    def fn(t, gamma):
        g = base.gradient(gamma)
        if sigma == 0.0:
            return g
        return g + sigma * rng.uniform(-1.0, 1.0, size=g.shape)

    b = base.lipschitz_bound if base.lipschitz_bound is not None else math.nan
    return GradientOracle(fn=fn, lipschitz_bound=b, noise_bound=sigma,
                          deterministic=(sigma == 0.0))


def inner_product_cost_oracle(x_sampler, y_sampler, seed: int,
                              lipschitz_bound: float = math.nan,
                              noise_bound: float = math.nan) -> GradientOracle:
    """Streamed cost matrices from noisy point observations.

    ``x_sampler(rng)`` and ``y_sampler(rng)`` return (m, d) and (n, d) point
    arrays; each call emits the negated cross-Gram matrix of a fresh,
    independent pair of draws. Unbiasedness for the negated Gram matrix of
    the mean points requires the two families to be sampled independently:
    reusing one noise draw for both sides would correlate them and bias the
    product, so don't.
    """
    rng = np.random.default_rng(seed)

    def fn(t, gamma):
        x = np.asarray(x_sampler(rng), dtype=np.float64)
        y = np.asarray(y_sampler(rng), dtype=np.float64)
        return -(x @ y.T)

    return GradientOracle(fn=fn, lipschitz_bound=lipschitz_bound,
                          noise_bound=noise_bound, deterministic=False)


def estimate_lipschitz_bound(objective: Objective, shape: tuple[int, int],
                             n_points: int = 64, seed: int = 0) -> float:
    """Empirical sup-norm of the gradient over random probability matrices.

    A sampling floor for the true bound, never a certificate; step-size
    rules take the bound from the caller, not from this helper.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        gamma = rng.dirichlet(np.full(shape[0] * shape[1], 2.0)).reshape(shape)
        worst = max(worst, float(np.abs(objective.gradient(gamma)).max()))
    return worst


def finite_difference_gradient(fn: Callable[[np.ndarray], float], gamma: np.ndarray,
                               step: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of a matrix."""
    gamma = np.asarray(gamma, dtype=np.float64)
    out = np.empty_like(gamma)
    it = np.nditer(gamma, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        hi = gamma.copy(); hi[idx] += step
        lo = gamma.copy(); lo[idx] -= step
        out[idx] = (fn(hi) - fn(lo)) / (2.0 * step)
    return out
