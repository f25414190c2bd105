"""Mean-field equilibrium and ODE dynamics.

Solves the fixed point s*, integrates the drift from several starting
states, and tracks the weighted-L1 Lyapunov function V(x) along the
trajectories, comparing its decay with the certified rate delta0.
"""

import numpy as np

from po2bounds import (
    SystemParams,
    check_lyapunov_decay,
    equilibrium,
    integrate,
    lyapunov_weights,
    taylor_check,
)

params = SystemParams(n_servers=100, gamma=0.1, alpha=0.05)
eq = equilibrium(params)
print(f"lambda = {params.lam:.4f}, buffer = {params.buffer}")
print("s*      =", np.array2string(eq.s_star, precision=6, suppress_small=True))
print(f"residual = {eq.residual:.2e}")

# the tail bound s*_k <= lambda^(2^k - 1) explains the doubly exponential decay
tail = params.lam ** (2.0 ** np.arange(1, params.buffer + 1) - 1)
print("tail cap =", np.array2string(tail, precision=6, suppress_small=True))

# trajectories contract toward s* from anywhere in the admissible set
lw = lyapunov_weights(params)
print(f"\nepsilon = {lw.epsilon:.4f}, k~ = {lw.k_tilde:.3f}, delta0 = {lw.delta0:.3e}")
rng = np.random.default_rng(1)
for label, s0 in [
    ("empty system", np.zeros(params.buffer)),
    ("all queues full", np.ones(params.buffer)),
    ("random state", np.sort(rng.random(params.buffer))[::-1].copy()),
]:
    traj = integrate(s0, t_end=120.0, dt=0.01, params=params)
    dist = np.linalg.norm(traj.states[-1] - eq.s_star)
    violation = check_lyapunov_decay(traj, lw, eq.s_star)
    v0 = lw.w @ np.abs(s0 - eq.s_star)
    print(f"{label:>16}: V(0) = {v0:.4f}, final distance {dist:.2e}, "
          f"worst decay violation {violation:.2e}")

# the drift is an exact quadratic, so its second-order expansion at the
# true equilibrium has zero remainder
worst = max(
    taylor_check(np.sort(rng.random(params.buffer))[::-1].copy(), eq.s_star, params)
    for _ in range(50)
)
print(f"\nsecond-order expansion residual over 50 random states: {worst:.2e}")
