"""Online optimization: a fresh loss per step, sublinear regret.

The solver is fully online: each step it sees only the current loss's
gradient at the current iterate. Here the stream is linear losses from
noisy cost draws; regret is measured against the best fixed plan for the
mean cost (the diagonal, by construction). The average regret per step
vanishes as T grows.
"""

import numpy as np

import mirror_sinkhorn as ms
from mirror_sinkhorn.experiments import gen_ot_synthetic

cost, polytope = gen_ot_synthetic(m=10, n=10, seed=0)
delta = ms.entropic_radius(polytope)
sigma = 0.1
lipschitz = float(np.abs(cost).max()) + sigma
competitor = np.diag(polytope.row_marginal)

for horizon in (100, 1000, 10_000):
    rng = np.random.default_rng(99)
    drawn = cost[None] + sigma * rng.uniform(-1, 1, (horizon, *cost.shape))
    losses = [ms.linear_objective(drawn[t]) for t in range(horizon)]
    config = ms.SolverConfig(schedule=ms.StepSchedule.anytime_sqrt(lipschitz, delta),
                             horizon=horizon)
    trace = ms.solve_online(losses, polytope, config)
    competitor_losses = (drawn * competitor).sum(axis=(1, 2))
    regret = float((trace.step_losses - competitor_losses).sum())
    rounded_regret = float((trace.step_losses_rounded - competitor_losses).sum())
    bound = (9 * lipschitz / 8) * np.sqrt(delta * horizon) * (2 + np.log(horizon))
    print(f"T={horizon:>6}: regret {regret:8.3f}  per step {regret / horizon:.5f}  "
          f"rounded-iterate regret {rounded_regret:8.3f}  bound {bound:8.1f}")
