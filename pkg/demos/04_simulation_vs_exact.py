"""Validate the stochastic simulator against the exact stationary law.

At small (N, b) the CTMC's stationary distribution is solvable exactly,
so the simulator's steady-state mean-square error can be checked against
the truth, and the two simulation schemes against each other.  The same
machinery then evaluates the bound quality at sizes where exact solves
still work.
"""

import numpy as np

from po2bounds import (
    SimConfig,
    SystemParams,
    build_generator,
    dominant_term,
    equilibrium,
    exact_mse,
    run,
    stationary,
)

params = SystemParams(n_servers=10, gamma=0.1, alpha=0.05, buffer=2)
eq = equilibrium(params)
gen = build_generator(params)
dist = stationary(gen)
truth = exact_mse(dist, eq.s_star, params)
print(f"N=10, b=2: {gen.space.count} states, stationary residual {dist.residual:.1e}")
print(f"exact scaled MSE          = {10 * truth:.6f}")

for scheme in ("uniformization", "gillespie"):
    stats = run(params, SimConfig(steps=2 * 10**6, seed=11, replicas=10, scheme=scheme))
    dev = (stats.mse_mean - truth) / stats.std_error
    print(f"{scheme:>14} estimate   = {stats.scaled_mse:.6f} "
          f"(dev {dev:+.2f} standard errors)")

# mean occupancy fractions come out of the same pass
stats = run(params, SimConfig(steps=2 * 10**6, seed=11, replicas=10))
print("\nmean occupancy fractions  =", np.array2string(stats.occupancy_mean, precision=4))
print("equilibrium s*            =", np.array2string(eq.s_star, precision=4))

# the 4x upper bound dominates the exact error at these sizes
print(f"\nscaled upper bound (b=2)  = {dominant_term(params).scaled_upper:.4f} "
      f">= exact {10 * truth:.4f}")

# tail exceedance estimate: fraction of time outside a shrinking ball
from po2bounds import TailConfig

for n in (10, 20, 40):
    p = SystemParams(n_servers=n, gamma=0.1, alpha=0.05, buffer=2)
    stats = run(p, SimConfig(steps=10**6, seed=3, replicas=5), TailConfig(r=32, epsilon=24.54))
    print(f"N={n:>3}: P(||S - s*||^(2r) >= N^-eps) ~ {stats.tail_prob:.4f}")
