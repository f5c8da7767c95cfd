"""Single-loop solver: one multiplicative gradient step, one marginal rescale.

The iterate index t starts at 1. Even steps rescale rows, odd steps rescale
columns, so the first normalization (t = 1) is a column step. The batch
driver reports the running mean of the first ``horizon`` iterates; the
online driver reports the last iterate and per-step losses.

Iterates switch to an entrywise-log representation for the rest of a run as
soon as any step's scaled gradient exceeds ``log_domain_threshold`` in
absolute value; the update and rescaling commute exactly with this
reparameterization, which is what keeps aggressive schedules finite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (
    ConfigurationError,
    DegenerateIterateError,
    OracleError,
    TransportPolytope,
    constraint_violation,
    independent_coupling,
)
from .rounding import round_to_polytope
from .schedules import StepSchedule


@dataclass
class GradientOracle:
    """Time-indexed source of gradient (or streamed cost) matrices.

    ``fn(t, gamma)`` must return a matrix of the coupling's shape. The
    declared bounds feed step-size rules: ``lipschitz_bound`` bounds the
    sup-norm of the mean gradient, ``noise_bound`` the root second moment
    of the sup-norm deviation from it.
    """

    fn: Callable[[int, np.ndarray], np.ndarray]
    lipschitz_bound: float
    noise_bound: float = 0.0
    deterministic: bool = True

    def __call__(self, t: int, gamma: np.ndarray) -> np.ndarray:
        return self.fn(t, gamma)


@dataclass
class SolverConfig:
    schedule: StepSchedule
    horizon: int
    normalization_steps: int = 1
    averaging: str = "mean"
    log_domain_threshold: float = 30.0
    checkpoint_stride: int | None = None
    checkpoints: Sequence[int] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.normalization_steps < 1:
            raise ConfigurationError("normalization_steps must be >= 1")
        if self.averaging not in ("mean", "last_iterate"):
            raise ConfigurationError(f"unknown averaging mode {self.averaging!r}")
        if self.checkpoint_stride is not None and self.checkpoint_stride < 1:
            raise ConfigurationError("checkpoint_stride must be >= 1")

    def checkpoint_steps(self) -> np.ndarray:
        """Sorted iterate indices at which traces record; always includes the horizon."""
        if self.checkpoints is not None:
            ts = np.unique(np.asarray(self.checkpoints, dtype=np.int64))
            if ts.size == 0 or ts[0] < 1 or ts[-1] > self.horizon:
                raise ConfigurationError("explicit checkpoints must lie in [1, horizon]")
            ts = np.union1d(ts, [self.horizon])
        elif self.checkpoint_stride is not None:
            ts = np.arange(self.checkpoint_stride, self.horizon + 1, self.checkpoint_stride)
            ts = np.union1d(ts, [1, self.horizon])
        else:
            powers = 2 ** np.arange(0, max(1, 1 + int(math.log2(self.horizon))))
            ts = np.union1d(powers[powers <= self.horizon], [self.horizon])
        return ts.astype(np.int64)


@dataclass
class SolverState:
    """Iterate, running sum of iterates, and representation mode at index t."""

    t: int
    gamma: np.ndarray
    polytope: TransportPolytope
    gamma_sum: np.ndarray | None = None
    log_gamma: np.ndarray | None = None

    @property
    def log_mode(self) -> bool:
        return self.log_gamma is not None

    @property
    def gamma_bar(self) -> np.ndarray | None:
        """Arithmetic mean of iterates 1..t, or None when averaging is off."""
        if self.gamma_sum is None:
            return None
        return self.gamma_sum / self.t


def initial_state(polytope: TransportPolytope, averaging: str = "mean") -> SolverState:
    gamma = independent_coupling(polytope)
    gamma_sum = gamma.copy() if averaging == "mean" else None
    return SolverState(t=1, gamma=gamma, polytope=polytope, gamma_sum=gamma_sum)


TRACE_COLUMNS = ("t", "f_value", "c_avg", "c_iter", "eta", "elapsed_ns")


@dataclass
class RunTrace:
    """Per-checkpoint record of a run plus its final couplings.

    ``f_values`` holds NaN where no evaluator was supplied; ``c_avg`` is the
    constraint violation of the running mean (NaN when averaging is off) and
    ``c_iter`` that of the raw iterate.
    """

    steps: np.ndarray
    f_values: np.ndarray
    c_avg: np.ndarray
    c_iter: np.ndarray
    etas: np.ndarray
    elapsed_ns: np.ndarray
    output: np.ndarray
    last_iterate: np.ndarray
    rounded: np.ndarray | None = None
    extras: dict[str, np.ndarray] = field(default_factory=dict)
    step_losses: np.ndarray | None = None
    step_losses_rounded: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        lines = [",".join(TRACE_COLUMNS) + "\n"]
        for i in range(self.steps.size):
            lines.append(
                f"{int(self.steps[i])},{float(self.f_values[i])!r},"
                f"{float(self.c_avg[i])!r},{float(self.c_iter[i])!r},"
                f"{float(self.etas[i])!r},{int(self.elapsed_ns[i])}\n"
            )
        return "".join(lines)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.csv_text())

    @staticmethod
    def columns_from_csv(path) -> dict[str, np.ndarray]:
        rows = []
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header {header!r}")
            for line in fh:
                rows.append([float(x) for x in line.strip().split(",")])
        data = np.asarray(rows, dtype=np.float64).reshape(-1, len(TRACE_COLUMNS))
        return {name: data[:, j] for j, name in enumerate(TRACE_COLUMNS)}


def _check_gradient(g: np.ndarray, shape) -> float:
    """Return max |g| after shape/finiteness validation."""
    if g.shape != shape:
        raise OracleError(f"oracle returned shape {g.shape}, expected {shape}")
    gmax = float(np.abs(g).max()) if g.size else 0.0
    if not math.isfinite(gmax):
        raise OracleError("oracle returned non-finite gradient entries")
    return gmax


def _logsumexp_rows(lg: np.ndarray, axis: int) -> np.ndarray:
    peak = lg.max(axis=axis)
    if not np.all(np.isfinite(peak)):
        raise DegenerateIterateError("a row/column collapsed to zero in log domain")
    return peak + np.log(np.exp(lg - np.expand_dims(peak, axis)).sum(axis=axis))


def _advance(gamma, log_gamma, t, g, eta, k, polytope, threshold):
    """One gradient step plus k alternating rescalings; returns the new pair.

    Exactly one of the two representations is active: ``log_gamma`` is None
    in dense mode. The switch to log mode is one-way.
    """
    mu, nu = polytope.row_marginal, polytope.col_marginal
    gmax = _check_gradient(g, (mu.size, nu.size))
    if log_gamma is None and eta * gmax > threshold:
        with np.errstate(divide="ignore"):
            log_gamma = np.log(gamma)

    if log_gamma is None:
        gp = gamma * np.exp(-eta * g)
        for j in range(k):
            if (t + j) % 2 == 0:
                sums = gp.sum(axis=1)
                if not np.all(sums > 0.0):
                    raise DegenerateIterateError(f"row sum underflowed to zero at step {t}")
                gp = gp * (mu / sums)[:, None]
            else:
                sums = gp.sum(axis=0)
                if not np.all(sums > 0.0):
                    raise DegenerateIterateError(f"column sum underflowed to zero at step {t}")
                gp = gp * (nu / sums)[None, :]
        return gp, None

    lg = log_gamma - eta * g
    for j in range(k):
        if (t + j) % 2 == 0:
            lg = lg + (np.log(mu) - _logsumexp_rows(lg, axis=1))[:, None]
        else:
            lg = lg + (np.log(nu) - _logsumexp_rows(lg, axis=0))[None, :]
    return np.exp(lg), lg


def step(state: SolverState, gradient: np.ndarray, eta: float, *,
         normalization_steps: int = 1, log_domain_threshold: float = 30.0) -> SolverState:
    """Advance one iterate: multiplicative gradient step, then rescaling.

    Even ``state.t`` rescales rows to the row marginal, odd rescales columns;
    with ``normalization_steps`` > 1 the rescalings keep alternating from
    that parity. The running mean is carried forward when present.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    gradient = np.asarray(gradient, dtype=np.float64)
    gamma, log_gamma = _advance(
        state.gamma, state.log_gamma, state.t, gradient, eta,
        normalization_steps, state.polytope, log_domain_threshold,
    )
    gamma_sum = None if state.gamma_sum is None else state.gamma_sum + gamma
    return SolverState(t=state.t + 1, gamma=gamma, polytope=state.polytope,
                       gamma_sum=gamma_sum, log_gamma=log_gamma)


def _record(trace_rows, t, reference, gamma, gamma_sum, polytope, schedule, f_eval,
            extra_metrics, started_ns):
    avg = None if gamma_sum is None else gamma_sum / t
    shown = avg if reference == "mean" else gamma
    f_val = float(f_eval(shown)) if f_eval is not None else math.nan
    c_avg = constraint_violation(avg, polytope) if avg is not None else math.nan
    row = {
        "t": t,
        "f_value": f_val,
        "c_avg": c_avg,
        "c_iter": constraint_violation(gamma, polytope),
        "eta": schedule.eta(t),
        "elapsed_ns": time.perf_counter_ns() - started_ns,
    }
    for name, fn in extra_metrics.items():
        row[name] = float(fn(avg, gamma))
    trace_rows.append(row)


def _build_trace(trace_rows, output, last, rounded, extras_names, **kw) -> RunTrace:
    return RunTrace(
        steps=np.asarray([r["t"] for r in trace_rows], dtype=np.int64),
        f_values=np.asarray([r["f_value"] for r in trace_rows], dtype=np.float64),
        c_avg=np.asarray([r["c_avg"] for r in trace_rows], dtype=np.float64),
        c_iter=np.asarray([r["c_iter"] for r in trace_rows], dtype=np.float64),
        etas=np.asarray([r["eta"] for r in trace_rows], dtype=np.float64),
        elapsed_ns=np.asarray([r["elapsed_ns"] for r in trace_rows], dtype=np.int64),
        output=output,
        last_iterate=last,
        rounded=rounded,
        extras={k: np.asarray([r[k] for r in trace_rows], dtype=np.float64)
                for k in extras_names},
        **kw,
    )


def solve(oracle, polytope: TransportPolytope, config: SolverConfig,
          f_eval: Callable[[np.ndarray], float] | None = None,
          extra_metrics: Mapping[str, Callable] | None = None) -> RunTrace:
    """Run the solver for ``config.horizon`` iterates from the product coupling.

    ``oracle(t, gamma)`` supplies the gradient at iterate t. The trace's
    ``f_values`` are ``f_eval`` applied to the running mean (or to the raw
    iterate when ``config.averaging == "last_iterate"``) at each checkpoint;
    the returned ``output`` is the mean of iterates 1..horizon (or the last
    iterate), with its rounded feasible companion.
    """
    extra_metrics = dict(extra_metrics or {})
    schedule = config.schedule
    threshold = config.log_domain_threshold
    k = config.normalization_steps
    mean_mode = config.averaging == "mean"
    checkpoints = config.checkpoint_steps()
    checkpoint_set = set(int(x) for x in checkpoints)

    started = time.perf_counter_ns()
    gamma = independent_coupling(polytope)
    gamma_sum = gamma.copy() if mean_mode else None
    log_gamma = None
    rows: list[dict] = []
    if 1 in checkpoint_set:
        _record(rows, 1, config.averaging, gamma, gamma_sum, polytope, schedule,
                f_eval, extra_metrics, started)

    t = 1
    while t < config.horizon:
        g = np.asarray(oracle(t, gamma), dtype=np.float64)
        gamma, log_gamma = _advance(gamma, log_gamma, t, g, schedule.eta(t), k,
                                    polytope, threshold)
        t += 1
        if mean_mode:
            gamma_sum += gamma
        if t in checkpoint_set:
            _record(rows, t, config.averaging, gamma, gamma_sum, polytope, schedule,
                    f_eval, extra_metrics, started)

    output = gamma_sum / config.horizon if mean_mode else gamma
    trace = _build_trace(rows, output, gamma, round_to_polytope(output, polytope),
                         extra_metrics.keys())
    trace.meta = {"seed": config.seed, "averaging": config.averaging,
                  "normalization_steps": k, "horizon": config.horizon}
    return trace


def solve_online(losses, polytope: TransportPolytope, config: SolverConfig,
                 record_rounded: bool = True) -> RunTrace:
    """Run against a stream of per-step losses; no averaging, output is the last iterate.

    ``losses`` is a sequence of objectives (or a callable t -> objective),
    one per iterate index 1..horizon; step t descends the gradient of the
    t-th loss at the current iterate. The trace carries the full per-step
    loss sequence ``step_losses`` (and ``step_losses_rounded``, each loss
    re-evaluated at the rounded iterate) for regret accounting.
    """
    loss_at = losses if callable(losses) else (lambda t: losses[t - 1])
    schedule = config.schedule
    checkpoints = set(int(x) for x in config.checkpoint_steps())
    T = config.horizon

    started = time.perf_counter_ns()
    gamma = independent_coupling(polytope)
    log_gamma = None
    rows: list[dict] = []
    step_losses = np.empty(T, dtype=np.float64)
    rounded_losses = np.empty(T, dtype=np.float64) if record_rounded else None

    for t in range(1, T + 1):
        loss = loss_at(t)
        step_losses[t - 1] = loss.value(gamma)
        if record_rounded:
            rounded_losses[t - 1] = loss.value(round_to_polytope(gamma, polytope))
        if t in checkpoints:
            _record(rows, t, "last_iterate", gamma, None, polytope, schedule,
                    loss.value, {}, started)
        if t == T:
            break
        g = np.asarray(loss.gradient(gamma), dtype=np.float64)
        gamma, log_gamma = _advance(gamma, log_gamma, t, g, schedule.eta(t),
                                    config.normalization_steps, polytope,
                                    config.log_domain_threshold)

    trace = _build_trace(rows, gamma, gamma, round_to_polytope(gamma, polytope), (),
                         step_losses=step_losses, step_losses_rounded=rounded_losses)
    trace.meta = {"seed": config.seed, "averaging": "last_iterate",
                  "normalization_steps": config.normalization_steps, "horizon": T}
    return trace
