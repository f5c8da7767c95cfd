"""Desk-scale experiment harness: data generation, seeded runs, summaries, plots.

Each experiment kind writes per-seed trace CSVs plus per-variant summary
CSVs holding the median and 10th/90th percentile of every recorded metric
at each checkpoint, and optionally a two-panel vector plot. Reruns with the
same config are bit-identical except for wall-clock columns.
"""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy.sparse.csgraph import shortest_path

from .baselines import sinkhorn
from .core import ConfigurationError, TransportPolytope, entropic_radius
from .objectives import (
    linear_objective,
    noisy_oracle,
    planted_strongly_convex,
    procrustes_objective,
)
from .schedules import StepSchedule
from .solver import GradientOracle, SolverConfig, solve, solve_online
from .tensor import TensorPolytope, tensor_radius, tensor_solve


# ---------------------------------------------------------------------------
# data generation


def gen_ot_synthetic(m: int, n: int, seed: int):
    """Zero-diagonal uniform cost with equal random marginals.

    The optimal value is 0, achieved by the diagonal plan, which is what
    makes this family a self-checking benchmark. Requires m == n.
    """
    if m != n:
        raise ConfigurationError("zero-diagonal construction needs m == n")
    rng = np.random.default_rng(seed)
    cost = rng.uniform(0.0, 1.0, (m, n))
    np.fill_diagonal(cost, 0.0)
    marginal = rng.dirichlet(np.ones(m))
    polytope = TransportPolytope(marginal, marginal.copy())
    return cost, polytope


def pixel_grid_cost(side: int) -> np.ndarray:
    """Pairwise Euclidean distances between the pixels of a square grid,
    rescaled so the largest entry is exactly 1.
    """
    if side < 1:
        raise ConfigurationError("grid side must be >= 1")
    coords = np.stack(np.meshgrid(np.arange(side), np.arange(side), indexing="ij"),
                      axis=-1).reshape(-1, 2).astype(np.float64)
    diff = coords[:, None, :] - coords[None, :, :]
    cost = np.sqrt((diff**2).sum(axis=-1))
    peak = cost.max()
    return cost / peak if peak > 0 else cost


def image_to_marginal(image: np.ndarray, floor: float = 0.01) -> np.ndarray:
    """Flatten a grayscale grid into a strictly positive probability vector.

    Intensities are floored at ``floor`` (relative to a unit-intensity
    image) so background pixels keep positive mass.
    """
    image = np.asarray(image, dtype=np.float64)
    if floor <= 0.0:
        raise ConfigurationError("floor must be positive")
    flat = np.maximum(image, floor).reshape(-1)
    return flat / flat.sum()


def gen_squares(size: int, seed: int, background: float = 0.01):
    """A pair of dark images with one bright axis-aligned square each.

    Returns (row_marginal, col_marginal, cost) over the flattened pixel
    grid; the cost is the rescaled Euclidean pixel distance.
    """
    if size < 2:
        raise ConfigurationError("image size must be >= 2")
    rng = np.random.default_rng(seed)

    def one_image():
        img = np.full((size, size), background)
        side = int(rng.integers(max(1, size // 5), max(2, size // 2) + 1))
        top = int(rng.integers(0, size - side + 1))
        left = int(rng.integers(0, size - side + 1))
        img[top:top + side, left:left + side] = 1.0
        return img

    mu = image_to_marginal(one_image(), background)
    nu = image_to_marginal(one_image(), background)
    return mu, nu, pixel_grid_cost(size)


def knn_shortest_path_matrix(points: np.ndarray, k: int, retries: int = 3) -> np.ndarray:
    """Capped, rescaled all-pairs hop distances on a symmetric k-NN graph.

    Unit edge weights; distances are capped at their 95th percentile and
    divided by the cap so entries lie in [0, 1]. If the graph is
    disconnected, k is incremented and the build retried up to ``retries``
    times before giving up.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k < n:
        raise ConfigurationError(f"k must be in [1, {n - 1}]")
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1)
    for attempt in range(retries + 1):
        kk = min(k + attempt, n - 1)
        adj = np.zeros((n, n), dtype=bool)
        order = np.argsort(d2, axis=1)
        for i in range(n):
            adj[i, order[i, 1:kk + 1]] = True
        adj |= adj.T
        dist = shortest_path(adj.astype(np.float64), method="D", unweighted=True)
        if np.all(np.isfinite(dist)):
            cap = np.percentile(dist, 95.0)
            if cap <= 0.0:
                return dist
            return np.minimum(dist, cap) / cap
    raise ConfigurationError(f"k-NN graph still disconnected after {retries} retries")


def gen_procrustes_data(n: int, d: int, k_nn: int, seed: int, noise: float = 0.0):
    """Two graph-distance matrices related by a hidden permutation.

    Samples n Gaussian points, permutes and perturbs them into a second
    view, and runs both views through the k-NN shortest-path pipeline.
    Returns (k_x, k_y, permutation) with ``k_y`` row/col order matching the
    permuted view, i.e. at zero noise k_y equals P k_x P^T exactly.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    perm = rng.permutation(n)
    y = x[perm] + noise * rng.standard_normal((n, d))
    k_x = knn_shortest_path_matrix(x, k_nn)
    k_y = knn_shortest_path_matrix(y, k_nn)
    return k_x, k_y, perm


def permutation_matrix(perm: np.ndarray) -> np.ndarray:
    n = perm.size
    p = np.zeros((n, n))
    p[np.arange(n), perm] = 1.0
    return p


def match_counts(gamma: np.ndarray, perm: np.ndarray, threshold: float):
    """Predicted and correct matches when thresholding a coupling.

    ``gamma[i, j] > threshold`` predicts that row point i matches column
    point j. Column point j is row point ``perm[j]`` in disguise, so a
    prediction is correct when i == perm[j].
    """
    predicted = gamma > threshold
    correct = predicted[perm, np.arange(perm.size)].sum()
    return int(predicted.sum()), int(correct)


# ---------------------------------------------------------------------------
# configuration

EXPERIMENT_KINDS = ("ot-synthetic", "ot-images", "strongly-convex", "procrustes",
                    "tensor-demo", "online-demo")

_DEFAULTS = {
    "ot-synthetic": dict(m=20, n=20, horizon=10_000, seeds=list(range(32)),
                         sigmas=[0.0, 0.1, 1.0], alphas=[0.1, 0.01]),
    "ot-images": dict(size=20, horizon=2_000, seeds=list(range(4)),
                      sigmas=[0.0], alphas=[0.1], background=0.01),
    "strongly-convex": dict(m=50, n=60, horizon=10_000, seeds=list(range(32)),
                            sigmas=[0.0, 0.1, 1.0], alpha=1.0, ks=[1]),
    "procrustes": dict(n=100, d_points=10, knn=5, noise=0.0, lam=3.0, ell=0.05,
                       horizon=10_000, seeds=list(range(4)), threshold_c=0.5, ks=[1]),
    "tensor-demo": dict(modes=[5, 5, 5], horizon=10_000, seeds=list(range(8))),
    "online-demo": dict(m=10, n=10, horizon=10_000, seeds=list(range(32)),
                        sigmas=[0.1], instance_seed=0),
}


@dataclass
class ExperimentConfig:
    kind: str
    out: str = "results"
    m: int = 0
    n: int = 0
    size: int = 0
    d_points: int = 0
    modes: list[int] = field(default_factory=list)
    horizon: int = 0
    seeds: list[int] = field(default_factory=list)
    sigmas: list[float] = field(default_factory=lambda: [0.0])
    alphas: list[float] = field(default_factory=list)
    alpha: float = 1.0
    ks: list[int] = field(default_factory=lambda: [1])
    schedule: str = "auto"
    delta: float | str = "auto"
    lipschitz: float | str = "auto"
    ell: float | None = None
    epsilon: float | None = None
    lam: float = 3.0
    knn: int = 5
    noise: float = 0.0
    threshold_c: float = 0.5
    background: float = 0.01
    instance_seed: int = 0
    image_a: str = ""
    image_b: str = ""
    workers: int = 1
    plot: bool = True

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        for name in ("m", "n", "size", "d_points", "horizon"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be positive")
        if any(x < 1 for x in self.modes):
            raise ConfigurationError("tensor modes must be positive")
        if not self.seeds:
            raise ConfigurationError("seeds must be nonempty")
        if any(k < 1 for k in self.ks):
            raise ConfigurationError("normalization step counts must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")


_LIST_INT = ("seeds", "ks", "modes")
_LIST_FLOAT = ("sigmas", "alphas")
_INT = ("m", "n", "size", "d_points", "horizon", "knn", "instance_seed", "workers")
_FLOAT = ("alpha", "ell", "epsilon", "lam", "noise", "threshold_c", "background")
_AUTO_FLOAT = ("delta", "lipschitz")
_STR = ("kind", "out", "schedule", "image_a", "image_b")
_BOOL = ("plot",)

# step-size rules are described with their conventional parameter letters
_ALIASES = {"T": "horizon", "B": "lipschitz", "sigma": "sigmas"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    key = _ALIASES.get(key, key)
    if key in _LIST_INT:
        return [int(x) for x in raw.split(",") if x.strip()]
    if key in _LIST_FLOAT:
        return [float(x) for x in raw.split(",") if x.strip()]
    if key in _INT:
        return int(raw)
    if key in _FLOAT:
        return float(raw)
    if key in _AUTO_FLOAT:
        return raw if raw == "auto" else float(raw)
    if key in _BOOL:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigurationError(f"cannot parse boolean {raw!r} for {key}")
    if key in _STR:
        return raw
    raise ConfigurationError(f"unknown config key {key!r}")


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment.

    Schedule parameters may use their conventional letters (``T``, ``B``,
    ``sigma``) as aliases for ``horizon``, ``lipschitz``, and ``sigmas``.
    """
    values: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            values[_ALIASES.get(key, key)] = _parse_value(key, raw)
    return values


def build_config(kind: str, file_values: dict | None = None,
                 overrides: dict | None = None) -> ExperimentConfig:
    """Defaults for the kind, then config-file values, then CLI overrides."""
    merged = dict(_DEFAULTS[kind]) if kind in _DEFAULTS else {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key == "kind":
                continue
            if value is not None:
                merged[key] = value
    if "seeds" in merged and isinstance(merged["seeds"], int):
        merged["seeds"] = list(range(merged["seeds"]))
    return ExperimentConfig(kind=kind, **merged)


# ---------------------------------------------------------------------------
# per-seed runners (top level so worker processes can import them)


def _auto(value, fallback):
    return fallback if value == "auto" else float(value)


def build_schedule(kind: str, *, lipschitz=1.0, radius=1.0, noise=0.0,
                   ell=None, epsilon=None, horizon=None) -> StepSchedule:
    """Construct a step-size rule from experiment-config parameters."""
    if kind == "anytime_sqrt":
        return StepSchedule.anytime_sqrt(lipschitz, radius, noise_bound=noise)
    if kind == "constant_horizon":
        return StepSchedule.constant_horizon(lipschitz, radius, horizon, noise_bound=noise)
    if kind == "inverse_t":
        if ell is None:
            raise ConfigurationError("inverse_t schedule needs ell")
        return StepSchedule.inverse_t(ell)
    if kind == "ot_anytime":
        return StepSchedule.ot_anytime(radius, noise_bound=noise)
    if kind == "ot_constant_epsilon":
        if epsilon is None:
            raise ConfigurationError("ot_constant_epsilon schedule needs epsilon")
        return StepSchedule.ot_constant_epsilon(epsilon, radius, noise_bound=noise)
    raise ConfigurationError(f"unknown schedule kind {kind!r} for experiment configs")


def _run_ot_seed(seed: int, params: dict):
    if params.get("cost") is None:
        cost, polytope = gen_ot_synthetic(params["m"], params["n"], seed)
    else:
        cost = params["cost"]
        polytope = TransportPolytope(params["mu"], params["nu"])
    sigma = params["sigma"]
    delta = _auto(params["delta"], entropic_radius(polytope))
    kind = params["schedule"]
    schedule = build_schedule(
        "ot_anytime" if kind == "auto" else kind,
        lipschitz=_auto(params.get("lipschitz", "auto"), float(np.abs(cost).max()) or 1.0),
        radius=delta, noise=sigma, ell=params.get("ell"),
        epsilon=params.get("epsilon"), horizon=params["horizon"])
    config = SolverConfig(schedule=schedule, horizon=params["horizon"], seed=seed)
    base = linear_objective(cost)
    if sigma > 0.0:
        oracle = noisy_oracle(base, sigma, seed=seed + 977)
    else:
        oracle = base.as_oracle()
    return solve(oracle, polytope, config, f_eval=base.value)


def _run_sinkhorn_seed(seed: int, params: dict):
    if params.get("cost") is None:
        cost, polytope = gen_ot_synthetic(params["m"], params["n"], seed)
    else:
        cost = params["cost"]
        polytope = TransportPolytope(params["mu"], params["nu"])
    return sinkhorn(cost, params["alpha"], polytope, params["horizon"])


def _run_strongly_convex_seed(seed: int, params: dict):
    rng = np.random.default_rng(seed)
    star = rng.uniform(0.5, 1.5, (params["m"], params["n"]))
    star /= star.sum()
    polytope = TransportPolytope(star.sum(axis=1), star.sum(axis=0))
    objective = planted_strongly_convex(polytope, star, params["alpha"])
    schedule = StepSchedule.inverse_t(params["alpha"])
    config = SolverConfig(schedule=schedule, horizon=params["horizon"],
                          normalization_steps=params.get("k_s", 1), seed=seed)
    sigma = params["sigma"]
    oracle = (noisy_oracle(objective, sigma, seed=seed + 977) if sigma > 0.0
              else objective.as_oracle())
    return solve(oracle, polytope, config, f_eval=objective.value)


def _run_procrustes_seed(seed: int, params: dict):
    n = params["n"]
    k_x, k_y, perm = gen_procrustes_data(n, params["d_points"], params["knn"],
                                         seed, params["noise"])
    polytope = TransportPolytope(np.full(n, 1.0 / n), np.full(n, 1.0 / n))
    objective = procrustes_objective(k_x, k_y, params["lam"])
    schedule = StepSchedule.inverse_t(params["ell"])
    config = SolverConfig(schedule=schedule, horizon=params["horizon"],
                          normalization_steps=params.get("k_s", 1),
                          averaging="last_iterate", seed=seed)
    threshold = params["threshold_c"] / n

    def predicted(avg, gamma):
        return match_counts(gamma, perm, threshold)[0]

    def correct(avg, gamma):
        return match_counts(gamma, perm, threshold)[1]

    return solve(objective.as_oracle(), polytope, config, f_eval=objective.value,
                 extra_metrics={"predicted_positives": predicted,
                                "true_positives": correct})


def _run_tensor_seed(seed: int, params: dict):
    rng = np.random.default_rng(seed)
    modes = tuple(params["modes"])
    cost = rng.uniform(0.0, 1.0, modes)
    polytope = TensorPolytope(tuple(rng.dirichlet(np.ones(mk)) for mk in modes))
    delta = _auto(params["delta"], tensor_radius(polytope))
    schedule = StepSchedule.anytime_sqrt(float(np.abs(cost).max()), delta)
    config = SolverConfig(schedule=schedule, horizon=params["horizon"], seed=seed)
    oracle = GradientOracle(fn=lambda t, g: cost,
                            lipschitz_bound=float(np.abs(cost).max()))
    return tensor_solve(oracle, polytope, config,
                        f_eval=lambda g: float((cost * g).sum()))


def _run_online_seed(seed: int, params: dict):
    cost, polytope = gen_ot_synthetic(params["m"], params["n"], params["instance_seed"])
    sigma = params["sigma"]
    horizon = params["horizon"]
    rng = np.random.default_rng(seed + 977)
    drawn = cost[None, :, :] + sigma * rng.uniform(-1.0, 1.0, (horizon, *cost.shape))
    losses = [linear_objective(drawn[t]) for t in range(horizon)]
    delta = _auto(params["delta"], entropic_radius(polytope))
    b = float(np.abs(cost).max()) + sigma
    schedule = StepSchedule.anytime_sqrt(b, delta)
    config = SolverConfig(schedule=schedule, horizon=horizon, seed=seed)
    trace = solve_online(losses, polytope, config)
    # Regret against the known optimal plan of the mean cost.
    star = np.diag(polytope.row_marginal)
    star_losses = np.asarray([(drawn[t] * star).sum() for t in range(horizon)])
    regret = np.cumsum(trace.step_losses - star_losses)
    trace.extras["regret"] = regret[trace.steps - 1]
    return trace


_RUNNERS = {
    "ot": _run_ot_seed,
    "sinkhorn": _run_sinkhorn_seed,
    "strongly-convex": _run_strongly_convex_seed,
    "procrustes": _run_procrustes_seed,
    "tensor": _run_tensor_seed,
    "online": _run_online_seed,
}


def _run_job(job):
    runner, seed, params = job
    return seed, _RUNNERS[runner](seed, params)


# ---------------------------------------------------------------------------
# summaries and plots


def summary_stats(values: np.ndarray):
    """Median and 10th/90th percentiles across seeds (rows), per checkpoint."""
    return {
        "median": np.percentile(values, 50.0, axis=0),
        "p10": np.percentile(values, 10.0, axis=0),
        "p90": np.percentile(values, 90.0, axis=0),
    }


def write_summary_csv(path, steps: np.ndarray, metrics: dict[str, np.ndarray]) -> None:
    """Per-checkpoint percentile table; ``metrics`` maps name -> seeds x checkpoints."""
    columns: dict[str, np.ndarray] = {}
    for name, values in metrics.items():
        for stat, arr in summary_stats(np.asarray(values)).items():
            columns[f"{name}_{stat}"] = arr
    _atomic_write(path, _csv_text(steps, columns))


def _csv_text(steps, columns):
    header = "t," + ",".join(columns) + "\n"
    lines = [header]
    names = list(columns)
    for i, t in enumerate(steps):
        vals = ",".join(repr(float(columns[name][i])) for name in names)
        lines.append(f"{int(t)},{vals}\n")
    return "".join(lines)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_summary_csv(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        rows = [[float(x) for x in line.strip().split(",")] for line in fh if line.strip()]
    if not rows:
        raise ValueError(f"{path}: summary has no data rows")
    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: ragged summary rows")
    return {name: data[:, j] for j, name in enumerate(names)}


def emit_plot(series: list[tuple[str, str]], out_path,
              metrics: tuple[str, ...] = ("f_value", "c_iter"),
              xscale: str = "log", yscale: str = "log", title: str | None = None):
    """Median lines with p10-p90 bands, one panel per metric, vector output.

    ``series`` is a list of (label, summary_csv_path). Raises before
    creating the file if there is nothing to draw.
    """
    if not series:
        raise ValueError("no series to plot")
    loaded = [(label, read_summary_csv(path)) for label, path in series]
    for label, cols in loaded:
        for metric in metrics:
            if f"{metric}_median" not in cols:
                raise ValueError(f"series {label!r} lacks metric {metric!r}")

    fig, axes = plt.subplots(1, len(metrics), figsize=(5.2 * len(metrics), 4.0))
    axes = np.atleast_1d(axes)
    for ax, metric in zip(axes, metrics):
        for label, cols in loaded:
            t = cols["t"]
            med = cols[f"{metric}_median"]
            keep = np.isfinite(med) & (med > 0 if yscale == "log" else np.ones_like(med, bool))
            if not np.any(keep):
                continue
            ax.plot(t[keep], med[keep], label=label)
            lo, hi = cols[f"{metric}_p10"], cols[f"{metric}_p90"]
            band = keep & np.isfinite(lo) & np.isfinite(hi)
            if yscale == "log":
                band &= lo > 0
            if np.any(band):
                ax.fill_between(t[band], lo[band], hi[band], alpha=0.2)
        ax.set_xscale(xscale)
        ax.set_yscale(yscale)
        ax.set_xlabel("steps")
        ax.set_ylabel(metric)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


# ---------------------------------------------------------------------------
# orchestration


def _execute(jobs: list, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def _variants(config: ExperimentConfig) -> list[tuple[str, str, dict]]:
    """(variant label, runner key, params) triples for the configured kind."""
    c = config
    common = dict(horizon=c.horizon, delta=c.delta, schedule=c.schedule,
                  lipschitz=c.lipschitz, ell=c.ell, epsilon=c.epsilon)
    out: list[tuple[str, str, dict]] = []
    if c.kind == "ot-synthetic":
        for sigma in c.sigmas:
            out.append((f"ms-sigma-{sigma:g}", "ot",
                        dict(common, m=c.m, n=c.n, sigma=sigma, cost=None)))
        for alpha in c.alphas:
            out.append((f"sinkhorn-alpha-{alpha:g}", "sinkhorn",
                        dict(m=c.m, n=c.n, alpha=alpha, horizon=c.horizon, cost=None)))
    elif c.kind == "ot-images":
        shared: dict = {}
        if c.image_a and c.image_b:
            from .io import read_matrix
            mu = image_to_marginal(read_matrix(c.image_a), c.background)
            nu = image_to_marginal(read_matrix(c.image_b), c.background)
            side = int(round(math.sqrt(mu.size)))
            if side * side != mu.size or nu.size != mu.size:
                raise ConfigurationError("loaded images must be equal square grids")
            shared = dict(cost=pixel_grid_cost(side), mu=mu, nu=nu)
        for sigma in c.sigmas:
            params = dict(common, size=c.size, sigma=sigma, background=c.background,
                          cost=None)
            params.update(shared)
            out.append((f"ms-sigma-{sigma:g}", "ot" if shared else "ot-images", params))
        for alpha in c.alphas:
            params = dict(size=c.size, alpha=alpha, horizon=c.horizon,
                          background=c.background, cost=None)
            params.update(shared)
            out.append((f"sinkhorn-alpha-{alpha:g}",
                        "sinkhorn" if shared else "sinkhorn-images", params))
    elif c.kind == "strongly-convex":
        for sigma in c.sigmas:
            out.append((f"ms-sigma-{sigma:g}", "strongly-convex",
                        dict(m=c.m, n=c.n, alpha=c.alpha, sigma=sigma,
                             horizon=c.horizon, k_s=1)))
        for k_s in c.ks:
            if k_s == 1:
                continue
            out.append((f"ks-{k_s}", "strongly-convex",
                        dict(m=c.m, n=c.n, alpha=c.alpha, sigma=0.0,
                             horizon=c.horizon, k_s=k_s)))
    elif c.kind == "procrustes":
        for k_s in c.ks:
            label = "ms" if k_s == 1 else f"ks-{k_s}"
            out.append((label, "procrustes",
                        dict(n=c.n, d_points=c.d_points, knn=c.knn, noise=c.noise,
                             lam=c.lam, ell=c.ell or 1.0, horizon=c.horizon,
                             threshold_c=c.threshold_c, k_s=k_s)))
    elif c.kind == "tensor-demo":
        out.append(("ms", "tensor", dict(modes=list(c.modes), horizon=c.horizon,
                                         delta=c.delta)))
    elif c.kind == "online-demo":
        for sigma in c.sigmas:
            out.append((f"online-sigma-{sigma:g}", "online",
                        dict(m=c.m, n=c.n, sigma=sigma, horizon=c.horizon,
                             instance_seed=c.instance_seed, delta=c.delta)))
    return out


def _run_squares_seed(seed: int, params: dict):
    mu, nu, cost = gen_squares(params["size"], seed, params["background"])
    inner = dict(params, cost=cost, mu=mu, nu=nu)
    return _run_ot_seed(seed, inner)


def _run_squares_sinkhorn_seed(seed: int, params: dict):
    mu, nu, cost = gen_squares(params["size"], seed, params["background"])
    polytope = TransportPolytope(mu, nu)
    return sinkhorn(cost, params["alpha"], polytope, params["horizon"])


_RUNNERS["ot-images"] = _run_squares_seed
_RUNNERS["sinkhorn-images"] = _run_squares_sinkhorn_seed


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute all seeds of every variant; write traces, summaries, and a plot.

    Returns a manifest dict of written paths. On a per-seed failure the
    completed outputs stay on disk next to ``failure_manifest.txt`` and the
    error propagates.
    """
    out_dir = Path(config.out) / config.kind
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict = {"traces": [], "summaries": [], "plots": []}
    summaries: list[tuple[str, str]] = []
    try:
        for label, runner, params in _variants(config):
            results = _execute([(runner, seed, params) for seed in config.seeds],
                               config.workers)
            results.sort(key=lambda pair: pair[0])
            traces = [trace for _, trace in results]
            for seed, trace in results:
                path = out_dir / f"trace_{label}_seed{seed}.csv"
                _atomic_write(path, trace.csv_text())
                written["traces"].append(str(path))
            steps = traces[0].steps
            metrics = {
                "f_value": np.stack([tr.f_values for tr in traces]),
                "c_avg": np.stack([tr.c_avg for tr in traces]),
                "c_iter": np.stack([tr.c_iter for tr in traces]),
            }
            for name in traces[0].extras:
                metrics[name] = np.stack([tr.extras[name] for tr in traces])
            summary_path = out_dir / f"summary_{label}.csv"
            write_summary_csv(summary_path, steps, metrics)
            written["summaries"].append(str(summary_path))
            summaries.append((label, str(summary_path)))
    except Exception as exc:
        _atomic_write(out_dir / "failure_manifest.txt",
                      f"experiment {config.kind} failed: {exc!r}\n"
                      f"completed traces: {len(written['traces'])}\n")
        raise
    if config.plot and summaries:
        plot_path = out_dir / f"plot_{config.kind}.svg"
        emit_plot(summaries, plot_path, title=config.kind)
        written["plots"].append(str(plot_path))
    return written
