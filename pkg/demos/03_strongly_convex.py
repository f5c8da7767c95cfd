"""Faster rates for strongly convex objectives with a 1/t step size.

We plant a known interior minimizer: the objective is an entropic form
whose constrained optimum sits exactly at a coupling we chose, so the
suboptimality gap is computable in closed form. With the 1/(ell t)
schedule the gap of the averaged iterate decays at roughly 1/T, orders
faster than the square-root rate of the general convex case.
"""

import numpy as np

import mirror_sinkhorn as ms

rng = np.random.default_rng(7)
star = rng.uniform(0.5, 1.5, (50, 60))
star /= star.sum()
polytope = ms.TransportPolytope(star.sum(axis=1), star.sum(axis=0))
objective = ms.planted_strongly_convex(polytope, star, alpha=1.0)
print("planted a 50x60 interior minimizer; f(minimizer) = 0 by construction")

config = ms.SolverConfig(schedule=ms.StepSchedule.inverse_t(1.0), horizon=10_000,
                         checkpoints=[10, 100, 1000, 10_000])
trace = ms.solve(objective.as_oracle(), polytope, config, f_eval=objective.value)
for t, gap in zip(trace.steps, trace.f_values):
    print(f"  T={t:>6}: gap {gap:.3e}")

print("with noisy gradients the same schedule still tracks the 1/T regime:")
noisy = ms.noisy_oracle(objective, sigma=0.5, seed=11)
noisy_trace = ms.solve(noisy, polytope, config, f_eval=objective.value)
for t, gap in zip(noisy_trace.steps, noisy_trace.f_values):
    print(f"  T={t:>6}: gap {gap:.3e}")

print("nested-loop comparison: 10 rescalings per gradient step "
      "(counted per gradient step) is not materially better:")
nested = ms.SolverConfig(schedule=ms.StepSchedule.inverse_t(1.0), horizon=1000,
                         normalization_steps=10)
single = ms.SolverConfig(schedule=ms.StepSchedule.inverse_t(1.0), horizon=1000)
for label, cfg in (("one rescale ", single), ("ten rescales", nested)):
    tr = ms.solve(objective.as_oracle(), polytope, cfg, f_eval=objective.value)
    print(f"  {label}: gap {tr.f_values[-1]:.3e} after 1000 gradient steps")
