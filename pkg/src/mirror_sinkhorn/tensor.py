"""Multimarginal solver on dense d-mode probability tensors.

Each step applies the multiplicative gradient update, measures the relative
entropy from every target marginal to the corresponding mode sum, and
rescales along the single most violated mode (smallest index on ties).
There is no tensor rounding: feasibility of the reported mean is only
approximate, at the rate the constraint bound dictates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateIterateError,
    OracleError,
    as_marginal,
    kl_divergence,
)
from .solver import RunTrace, SolverConfig, _build_trace

MAX_TENSOR_ENTRIES = 10**8


@dataclass(frozen=True)
class TensorPolytope:
    """Probability tensors whose mode-k sums match the k-th marginal, for every k."""

    marginals: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.marginals) < 2:
            raise ValueError("need at least two marginals")
        object.__setattr__(self, "marginals",
                           tuple(as_marginal(m) for m in self.marginals))
        if math.prod(self.shape) > MAX_TENSOR_ENTRIES:
            raise ValueError(f"tensor would exceed {MAX_TENSOR_ENTRIES} entries")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(m.size for m in self.marginals)

    @property
    def ndim(self) -> int:
        return len(self.marginals)


def product_tensor(polytope: TensorPolytope) -> np.ndarray:
    """Outer product of all marginals; satisfies every constraint exactly."""
    out = polytope.marginals[0]
    for m in polytope.marginals[1:]:
        out = np.multiply.outer(out, m)
    return out


def mode_marginal(gamma: np.ndarray, k: int) -> np.ndarray:
    """Sum of the tensor over all modes except ``k`` (0-based)."""
    gamma = np.asarray(gamma)
    if not 0 <= k < gamma.ndim:
        raise IndexError(f"mode {k} out of range for a {gamma.ndim}-mode tensor")
    axes = tuple(a for a in range(gamma.ndim) if a != k)
    return gamma.sum(axis=axes)


def tensor_radius(polytope: TensorPolytope) -> float:
    """Sum over modes of the max-absolute-log of each marginal."""
    return float(sum(np.abs(np.log(m)).max() for m in polytope.marginals))


def constraint_gaps(gamma: np.ndarray, polytope: TensorPolytope) -> float:
    """Sum over modes of the l1 distance from each mode sum to its target."""
    return float(sum(np.abs(mode_marginal(gamma, k) - m).sum()
                     for k, m in enumerate(polytope.marginals)))


@dataclass
class TensorSolverState:
    t: int
    gamma: np.ndarray
    polytope: TensorPolytope
    gamma_sum: np.ndarray | None = None
    log_gamma: np.ndarray | None = None
    last_mode: int | None = None
    last_gaps: np.ndarray | None = None

    @property
    def gamma_bar(self) -> np.ndarray | None:
        if self.gamma_sum is None:
            return None
        return self.gamma_sum / self.t


def tensor_initial_state(polytope: TensorPolytope, averaging: str = "mean") -> TensorSolverState:
    gamma = product_tensor(polytope)
    gamma_sum = gamma.copy() if averaging == "mean" else None
    return TensorSolverState(t=1, gamma=gamma, polytope=polytope, gamma_sum=gamma_sum)


def _log_mode_marginal(lg: np.ndarray, k: int) -> np.ndarray:
    axes = tuple(a for a in range(lg.ndim) if a != k)
    peak = lg.max(axis=axes)
    if not np.all(np.isfinite(peak)):
        raise DegenerateIterateError("a mode slice collapsed to zero in log domain")
    return peak + np.log(np.exp(lg - _along(peak, k, lg.ndim)).sum(axis=axes))


def _along(vec: np.ndarray, k: int, ndim: int) -> np.ndarray:
    """Reshape a length-m_k vector to broadcast along mode k."""
    shape = [1] * ndim
    shape[k] = vec.size
    return vec.reshape(shape)


def _tensor_advance(gamma, log_gamma, g, eta, polytope, threshold):
    """Gradient step, then rescale the KL-furthest mode; returns (gamma, log, mode, gaps)."""
    marginals = polytope.marginals
    if g.shape != polytope.shape:
        raise OracleError(f"oracle returned shape {g.shape}, expected {polytope.shape}")
    gmax = float(np.abs(g).max())
    if not math.isfinite(gmax):
        raise OracleError("oracle returned non-finite gradient entries")
    if log_gamma is None and eta * gmax > threshold:
        with np.errstate(divide="ignore"):
            log_gamma = np.log(gamma)

    d = polytope.ndim
    gaps = np.empty(d, dtype=np.float64)
    if log_gamma is None:
        gp = gamma * np.exp(-eta * g)
        sums = [mode_marginal(gp, k) for k in range(d)]
        for k in range(d):
            if np.any(sums[k] <= 0.0):
                raise DegenerateIterateError("mode sum underflowed to zero")
            gaps[k] = kl_divergence(marginals[k], sums[k])
        mode = int(np.argmax(gaps))
        gp = gp * _along(marginals[mode] / sums[mode], mode, d)
        return gp, None, mode, gaps

    lg = log_gamma - eta * g
    log_sums = [_log_mode_marginal(lg, k) for k in range(d)]
    for k in range(d):
        gaps[k] = kl_divergence(marginals[k], np.exp(log_sums[k]))
    mode = int(np.argmax(gaps))
    lg = lg + _along(np.log(marginals[mode]) - log_sums[mode], mode, d)
    return np.exp(lg), lg, mode, gaps


def tensor_step(state: TensorSolverState, gradient: np.ndarray, eta: float, *,
                log_domain_threshold: float = 30.0) -> TensorSolverState:
    """Advance one iterate, rescaling only the most violated mode."""
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    gradient = np.asarray(gradient, dtype=np.float64)
    gamma, log_gamma, mode, gaps = _tensor_advance(
        state.gamma, state.log_gamma, gradient, eta, state.polytope,
        log_domain_threshold)
    gamma_sum = None if state.gamma_sum is None else state.gamma_sum + gamma
    return TensorSolverState(t=state.t + 1, gamma=gamma, polytope=state.polytope,
                             gamma_sum=gamma_sum, log_gamma=log_gamma,
                             last_mode=mode, last_gaps=gaps)


def tensor_solve(oracle, polytope: TensorPolytope, config: SolverConfig,
                 f_eval=None) -> RunTrace:
    """Run the greedy multimarginal solver from the product tensor.

    Mirrors the matrix driver: the output is the mean of iterates
    1..horizon (or the last iterate), and trace constraint columns hold the
    summed mode gaps. There is no rounded companion.
    """
    schedule = config.schedule
    mean_mode = config.averaging == "mean"
    checkpoints = set(int(x) for x in config.checkpoint_steps())

    started = time.perf_counter_ns()
    gamma = product_tensor(polytope)
    gamma_sum = gamma.copy() if mean_mode else None
    log_gamma = None
    rows: list[dict] = []

    def record(t):
        avg = None if gamma_sum is None else gamma_sum / t
        shown = avg if mean_mode else gamma
        rows.append({
            "t": t,
            "f_value": float(f_eval(shown)) if f_eval is not None else math.nan,
            "c_avg": constraint_gaps(avg, polytope) if avg is not None else math.nan,
            "c_iter": constraint_gaps(gamma, polytope),
            "eta": schedule.eta(t),
            "elapsed_ns": time.perf_counter_ns() - started,
        })

    if 1 in checkpoints:
        record(1)
    t = 1
    while t < config.horizon:
        g = np.asarray(oracle(t, gamma), dtype=np.float64)
        gamma, log_gamma, _, _ = _tensor_advance(gamma, log_gamma, g, schedule.eta(t),
                                                 polytope, config.log_domain_threshold)
        t += 1
        if mean_mode:
            gamma_sum += gamma
        if t in checkpoints:
            record(t)

    output = gamma_sum / config.horizon if mean_mode else gamma
    trace = _build_trace(rows, output, gamma, None, ())
    trace.meta = {"seed": config.seed, "averaging": config.averaging,
                  "normalization_steps": 1, "horizon": config.horizon}
    return trace
