"""Command-line entry point.

Experiment subcommands (ot-synthetic, ot-images, strongly-convex,
procrustes, tensor-demo, online-demo) drive the harness; file subcommands
(sinkhorn, exact-ot, round) operate on matrix CSVs. Exit codes: 0 success,
1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .baselines import exact_ot_small, sinkhorn
from .core import (
    ConfigurationError,
    DegenerateIterateError,
    OracleError,
    TransportPolytope,
)
from .experiments import EXPERIMENT_KINDS, build_config, parse_config_file, run_experiment
from .rounding import round_to_polytope


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _add_experiment_flags(sub):
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--T", dest="horizon", type=int, help="number of steps")
    sub.add_argument("--seed", type=int, help="single seed (overrides --seeds)")
    sub.add_argument("--seeds", help="comma list of seeds, or a count")
    sub.add_argument("--sigmas", help="comma list of gradient noise levels")
    sub.add_argument("--alphas", help="comma list of entropic-scaling comparisons")
    sub.add_argument("--alpha", type=float, help="curvature of the planted objective")
    sub.add_argument("--ks", help="comma list of normalization counts per step")
    sub.add_argument("--m", type=int)
    sub.add_argument("--n", type=int)
    sub.add_argument("--size", type=int, help="image side length")
    sub.add_argument("--modes", help="comma list of tensor mode sizes")
    sub.add_argument("--d-points", type=int, help="point dimension")
    sub.add_argument("--knn", type=int)
    sub.add_argument("--noise", type=float, help="point perturbation level")
    sub.add_argument("--lam", type=float, help="quadratic penalty weight")
    sub.add_argument("--ell", type=float, help="inverse-t schedule constant")
    sub.add_argument("--epsilon", type=float)
    sub.add_argument("--threshold-c", type=float, help="matching threshold constant c in c/n")
    sub.add_argument("--background", type=float, help="image background floor")
    sub.add_argument("--schedule", help="step-size rule (default: per experiment)")
    sub.add_argument("--delta", help="'auto' or a numeric radius")
    sub.add_argument("--lipschitz", help="'auto' or a numeric gradient bound")
    sub.add_argument("--instance-seed", type=int)
    sub.add_argument("--image-a", help="CSV grayscale grid for the source image")
    sub.add_argument("--image-b", help="CSV grayscale grid for the target image")
    sub.add_argument("--workers", type=int, help="parallel seed workers")
    sub.add_argument("--no-plot", action="store_true")


def _parse_list(raw, cast):
    return [cast(x) for x in raw.split(",") if x.strip()]


def _experiment_overrides(args) -> dict:
    overrides = {}
    direct = ("out", "horizon", "alpha", "m", "n", "size", "knn", "noise", "lam",
              "ell", "epsilon", "threshold_c", "background", "schedule",
              "instance_seed", "image_a", "image_b", "workers", "d_points")
    for name in direct:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    elif args.seeds is not None:
        raw = args.seeds
        overrides["seeds"] = list(range(int(raw))) if "," not in raw else _parse_list(raw, int)
    if args.sigmas is not None:
        overrides["sigmas"] = _parse_list(args.sigmas, float)
    if args.alphas is not None:
        overrides["alphas"] = _parse_list(args.alphas, float)
    if args.ks is not None:
        overrides["ks"] = _parse_list(args.ks, int)
    if args.modes is not None:
        overrides["modes"] = _parse_list(args.modes, int)
    if args.delta is not None:
        overrides["delta"] = args.delta if args.delta == "auto" else float(args.delta)
    if args.lipschitz is not None:
        overrides["lipschitz"] = (args.lipschitz if args.lipschitz == "auto"
                                  else float(args.lipschitz))
    if args.no_plot:
        overrides["plot"] = False
    return overrides


def _load_polytope(args) -> TransportPolytope:
    return TransportPolytope(io.read_vector(args.row_marginal),
                             io.read_vector(args.col_marginal))


def _read_matrix_or_coupling(path):
    try:
        return io.read_coupling(path)
    except ValueError:
        return io.read_matrix(path)


def build_parser() -> _Parser:
    parser = _Parser(prog="mirror-sinkhorn",
                     description="Convex optimization on transport polytopes")
    subs = parser.add_subparsers(dest="command", required=True)

    for kind in EXPERIMENT_KINDS:
        sub = subs.add_parser(kind, help=f"run the {kind} experiment")
        _add_experiment_flags(sub)

    sink = subs.add_parser("sinkhorn", help="entropic scaling baseline on CSV inputs")
    sink.add_argument("--cost", required=True)
    sink.add_argument("--row-marginal", required=True)
    sink.add_argument("--col-marginal", required=True)
    sink.add_argument("--alpha", type=float, required=True)
    sink.add_argument("--iterations", type=int, default=1000)
    sink.add_argument("--out-trace")
    sink.add_argument("--out-plan")

    exact = subs.add_parser("exact-ot", help="exact small-instance optimum from CSV inputs")
    exact.add_argument("--cost", required=True)
    exact.add_argument("--row-marginal", required=True)
    exact.add_argument("--col-marginal", required=True)
    exact.add_argument("--out-plan")

    rnd = subs.add_parser("round", help="project a nonnegative matrix onto the polytope")
    rnd.add_argument("--input", required=True)
    rnd.add_argument("--row-marginal", required=True)
    rnd.add_argument("--col-marginal", required=True)
    rnd.add_argument("--out", required=True)

    return parser


def _dispatch(args) -> int:
    if args.command in EXPERIMENT_KINDS:
        file_values = parse_config_file(args.config) if args.config else {}
        config = build_config(args.command, file_values, _experiment_overrides(args))
        written = run_experiment(config)
        print(f"wrote {len(written['traces'])} traces, "
              f"{len(written['summaries'])} summaries to {config.out}")
        return 0

    if args.command == "sinkhorn":
        polytope = _load_polytope(args)
        cost = io.read_matrix(args.cost)
        trace = sinkhorn(cost, args.alpha, polytope, args.iterations)
        if args.out_trace:
            trace.to_csv(args.out_trace)
        if args.out_plan:
            io.write_coupling(args.out_plan, trace.output)
        print(f"final objective {float((cost * trace.output).sum())!r} "
              f"constraint violation {float(trace.c_iter[-1])!r}")
        return 0

    if args.command == "exact-ot":
        polytope = _load_polytope(args)
        cost = io.read_matrix(args.cost)
        solution = exact_ot_small(cost, polytope)
        if args.out_plan:
            io.write_coupling(args.out_plan, solution.plan)
        print(f"optimal value {solution.value!r}")
        return 0

    if args.command == "round":
        polytope = _load_polytope(args)
        gamma = _read_matrix_or_coupling(args.input)
        io.write_coupling(args.out, round_to_polytope(gamma, polytope))
        print(f"wrote rounded plan to {args.out}")
        return 0

    raise ConfigurationError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except (ConfigurationError, FileNotFoundError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateIterateError, OracleError, FloatingPointError,
            np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
