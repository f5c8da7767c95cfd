"""Couplings with more than two marginals: greedy mode rescaling.

A d-mode probability tensor must match one prescribed marginal per mode.
After each multiplicative gradient step the solver measures, for every
mode, the relative entropy from the target marginal to the current mode
sum, and rescales only the worst offender. The summed constraint gaps of
the averaged tensor decay at the same square-root rate as the two-marginal
case, with the radius summed over all modes.
"""

import numpy as np

import mirror_sinkhorn as ms

rng = np.random.default_rng(3)
modes = (5, 5, 5)
cost = rng.uniform(0.0, 1.0, modes)
polytope = ms.TensorPolytope(tuple(rng.dirichlet(np.ones(mk)) for mk in modes))
delta = ms.tensor_radius(polytope)
print(f"3-mode coupling, shape {modes}, summed log-radius {delta:.2f}")

lipschitz = float(np.abs(cost).max())
config = ms.SolverConfig(schedule=ms.StepSchedule.anytime_sqrt(lipschitz, delta),
                         horizon=10_000)
oracle = ms.GradientOracle(fn=lambda t, g: cost, lipschitz_bound=lipschitz)
trace = ms.tensor_solve(oracle, polytope, config,
                        f_eval=lambda g: float((cost * g).sum()))

for t, f, c in zip(trace.steps[::3], trace.f_values[::3], trace.c_avg[::3]):
    print(f"  t={t:>6}: objective {f:.4f}  summed marginal gaps {c:.2e}")
bound = 1.5 * np.sqrt(delta / trace.steps[-1]) * (2 + np.log(trace.steps[-1]))
print(f"final gaps {trace.c_avg[-1]:.2e} vs guaranteed {bound:.2e}")

# watching the greedy choice at work on a single step:
state = ms.tensor_initial_state(polytope)
push = np.zeros(modes)
push[:, :, 0] = 1.0  # deflate one slice of the third mode
state = ms.tensor_step(state, push, eta=0.7)
print(f"after deflating a third-mode slice the greedy rescale picked mode "
      f"{state.last_mode} with gaps {np.round(state.last_gaps, 4)}")
