"""Comparators: classical entropic matrix scaling and an exact LP oracle.

The LP oracle solves the transportation problem by network simplex on the
bipartite structure (northwest-corner start, Bland's anti-cycling rule) and
certifies its answer by dual feasibility and strong duality before
returning. It exists to check the iterative solvers and is deliberately
independent of them.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import TransportPolytope, constraint_violation, col_normalize, row_normalize
from .rounding import round_to_polytope
from .solver import RunTrace, _build_trace

EXACT_SIZE_LIMIT = 64
LOG_DOMAIN_THRESHOLD = 30.0


def sinkhorn(cost: np.ndarray, alpha: float, polytope: TransportPolytope,
             iterations: int, checkpoints=None, f_eval=None) -> RunTrace:
    """Alternating row/column scaling of exp(-cost/alpha).

    Odd steps rescale rows, even steps columns; ``iterations`` counts
    normalizations. Switches to log-domain arithmetic when max|cost|/alpha
    exceeds the overflow threshold. The trace records <cost, gamma_t> and
    the constraint violation of the iterate at geometric checkpoints.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if cost.shape != polytope.shape:
        raise ValueError(f"cost shape {cost.shape} does not match polytope {polytope.shape}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    mu, nu = polytope.row_marginal, polytope.col_marginal
    if checkpoints is None:
        powers = 2 ** np.arange(0, 1 + int(math.log2(iterations)))
        checkpoints = np.union1d(powers[powers <= iterations], [iterations])
    checkpoint_set = set(int(x) for x in checkpoints)

    log_mode = float(np.abs(cost).max()) / alpha > LOG_DOMAIN_THRESHOLD
    started = time.perf_counter_ns()
    rows: list[dict] = []
    if log_mode:
        lg = -cost / alpha
        log_mu, log_nu = np.log(mu), np.log(nu)
        gamma = None
    else:
        gamma = np.exp(-cost / alpha)

    def record(t, g):
        rows.append({
            "t": t,
            "f_value": float((cost * g).sum()) if f_eval is None else float(f_eval(g)),
            "c_avg": math.nan,
            "c_iter": constraint_violation(g, polytope),
            "eta": math.nan,
            "elapsed_ns": time.perf_counter_ns() - started,
        })

    for t in range(1, iterations + 1):
        if log_mode:
            if t % 2 == 1:
                peak = lg.max(axis=1)
                lse = peak + np.log(np.exp(lg - peak[:, None]).sum(axis=1))
                lg = lg + (log_mu - lse)[:, None]
            else:
                peak = lg.max(axis=0)
                lse = peak + np.log(np.exp(lg - peak[None, :]).sum(axis=0))
                lg = lg + (log_nu - lse)[None, :]
            if t in checkpoint_set:
                record(t, np.exp(lg))
        else:
            gamma = row_normalize(gamma, mu) if t % 2 == 1 else col_normalize(gamma, nu)
            if t in checkpoint_set:
                record(t, gamma)

    final = np.exp(lg) if log_mode else gamma
    trace = _build_trace(rows, final, final, round_to_polytope(final, polytope), ())
    trace.meta = {"alpha": alpha, "iterations": iterations, "algorithm": "sinkhorn"}
    return trace


@dataclass
class ExactSolution:
    value: float
    plan: np.ndarray
    row_duals: np.ndarray
    col_duals: np.ndarray


def exact_ot_small(cost: np.ndarray, polytope: TransportPolytope) -> ExactSolution:
    """Exact optimal transport on small instances (at most 64 entries).

    Runs network simplex seeded by the northwest-corner plan and refuses to
    return an uncertified answer: the plan must be feasible, every reduced
    cost nonnegative, and the primal and dual values equal to within 1e-9.
    """
    cost = np.asarray(cost, dtype=np.float64)
    m, n = polytope.shape
    if cost.shape != (m, n):
        raise ValueError(f"cost shape {cost.shape} does not match polytope {(m, n)}")
    if m * n > EXACT_SIZE_LIMIT:
        raise ValueError(f"instance has {m * n} entries, exceeding the {EXACT_SIZE_LIMIT} guard")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix has non-finite entries")

    flow, basis = _northwest_corner(polytope.row_marginal, polytope.col_marginal)
    for _ in range(10000):
        u, v = _tree_duals(cost, basis, m, n)
        entering = _first_negative_reduced_cost(cost, u, v, basis)
        if entering is None:
            break
        _pivot(flow, basis, entering, m, n)
    else:
        raise RuntimeError("network simplex failed to terminate")

    plan = np.zeros((m, n))
    for (i, j) in basis:
        plan[i, j] = max(flow[(i, j)], 0.0)
    value = float((cost * plan).sum())
    _certify(cost, plan, u, v, polytope, value)
    return ExactSolution(value=value, plan=plan, row_duals=u, col_duals=v)


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    m, n = a.size, b.size
    a = a.copy()
    b = b.copy()
    flow: dict[tuple[int, int], float] = {}
    i = j = 0
    while len(flow) < m + n - 1:
        x = min(a[i], b[j])
        flow[(i, j)] = x
        a[i] -= x
        b[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if (a[i] <= b[j] and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1
    return flow, list(flow.keys())


def _tree_duals(cost, basis, m, n):
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    pending = list(basis)
    while pending:
        progressed = False
        rest = []
        for (i, j) in pending:
            if not math.isnan(u[i]) and math.isnan(v[j]):
                v[j] = cost[i, j] - u[i]
                progressed = True
            elif math.isnan(u[i]) and not math.isnan(v[j]):
                u[i] = cost[i, j] - v[j]
                progressed = True
            elif math.isnan(u[i]) and math.isnan(v[j]):
                rest.append((i, j))
        pending = rest
        if pending and not progressed:
            raise RuntimeError("basis is not a spanning tree")
    return u, v


def _first_negative_reduced_cost(cost, u, v, basis, tol=1e-12):
    basic = set(basis)
    reduced = cost - u[:, None] - v[None, :]
    for i in range(cost.shape[0]):
        for j in range(cost.shape[1]):
            if (i, j) not in basic and reduced[i, j] < -tol:
                return (i, j)
    return None


def _basis_cycle(basis, entering, m, n):
    """Alternating cycle closed by the entering cell in the basis tree."""
    adj_rows: dict[int, list[int]] = {}
    adj_cols: dict[int, list[int]] = {}
    for (i, j) in basis:
        adj_rows.setdefault(i, []).append(j)
        adj_cols.setdefault(j, []).append(i)

    start_i, start_j = entering
    # Path from row node start_i to col node start_j through basic cells.
    stack = [(start_i, True, [start_i])]
    seen = {("r", start_i)}
    while stack:
        node, is_row, path = stack.pop()
        if is_row:
            for j in adj_rows.get(node, []):
                if j == start_j:
                    return path + [j]
                if ("c", j) not in seen:
                    seen.add(("c", j))
                    stack.append((j, False, path + [j]))
        else:
            for i in adj_cols.get(node, []):
                if ("r", i) not in seen:
                    seen.add(("r", i))
                    stack.append((i, True, path + [i]))
    raise RuntimeError("no cycle found; basis is not spanning")


def _pivot(flow, basis, entering, m, n):
    path = _basis_cycle(basis, entering, m, n)
    # path alternates row, col, row, col, ... starting at entering's row and
    # ending at its column; consecutive pairs are the basic cells on the cycle.
    cells = [entering]
    for k in range(len(path) - 1):
        if k % 2 == 0:
            cells.append((path[k], path[k + 1]))
        else:
            cells.append((path[k + 1], path[k]))
    minus = cells[1::2]
    theta = min(flow[c] for c in minus)
    leaving = min(c for c in minus if flow[c] == theta)  # Bland: smallest index
    for idx, c in enumerate(cells):
        if idx == 0:
            flow[c] = flow.get(c, 0.0) + theta
        elif idx % 2 == 1:
            flow[c] -= theta
        else:
            flow[c] += theta
    basis.remove(leaving)
    del flow[leaving]
    basis.append(entering)


def _certify(cost, plan, u, v, polytope, value, tol=1e-9):
    if np.any(plan < 0.0):
        raise RuntimeError("certification failed: negative flow")
    if constraint_violation(plan, polytope) > 1e-10:
        raise RuntimeError("certification failed: plan marginals off target")
    reduced = cost - u[:, None] - v[None, :]
    if reduced.min() < -tol:
        raise RuntimeError("certification failed: negative reduced cost at optimum")
    dual_value = float(polytope.row_marginal @ u + polytope.col_marginal @ v)
    if abs(value - dual_value) > tol:
        raise RuntimeError("certification failed: duality gap "
                           f"{abs(value - dual_value):.3e}")


def ot_value_by_vertex_enumeration(cost: np.ndarray, polytope: TransportPolytope):
    """Brute-force optimum over all basic feasible solutions (at most 16 entries).

    Enumerates every spanning-tree support, solves the implied flows, and
    keeps the best feasible one. Exponential; only a cross-check.
    """
    cost = np.asarray(cost, dtype=np.float64)
    m, n = polytope.shape
    if m * n > 16:
        raise ValueError("vertex enumeration limited to 16 entries")
    mu, nu = polytope.row_marginal, polytope.col_marginal
    cells = list(itertools.product(range(m), range(n)))
    best_value, best_plan = math.inf, None
    for support in itertools.combinations(cells, m + n - 1):
        flows = _solve_tree_flows(support, mu, nu, m, n)
        if flows is None or min(flows.values()) < -1e-12:
            continue
        plan = np.zeros((m, n))
        for (i, j), x in flows.items():
            plan[i, j] = max(x, 0.0)
        value = float((cost * plan).sum())
        if value < best_value:
            best_value, best_plan = value, plan
    return best_value, best_plan


def _solve_tree_flows(support, mu, nu, m, n):
    """Flows determined by marginal conservation on a candidate tree support."""
    remaining = {("r", i): float(mu[i]) for i in range(m)}
    remaining.update({("c", j): float(nu[j]) for j in range(n)})
    edges = {cell: None for cell in support}
    incident: dict[tuple, list] = {node: [] for node in remaining}
    for (i, j) in support:
        incident[("r", i)].append((i, j))
        incident[("c", j)].append((i, j))
    unresolved = dict.fromkeys(support)
    while unresolved:
        leaf = next((node for node, cells in incident.items() if len(cells) == 1), None)
        if leaf is None:
            return None  # cycle: not a tree
        (i, j) = incident[leaf][0]
        x = remaining[leaf]
        edges[(i, j)] = x
        for node in (("r", i), ("c", j)):
            incident[node].remove((i, j))
            remaining[node] -= x
        del unresolved[(i, j)]
    if any(abs(r) > 1e-9 for r in remaining.values()):
        return None  # disconnected support cannot satisfy both marginals
    return edges
