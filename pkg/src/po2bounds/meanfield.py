"""Mean-field model of the power-of-two-choices supermarket system.

The state is s = (s_1, ..., s_b) where s_k is the fraction of servers
holding at least k jobs, with implicit boundaries s_0 = 1 and
s_{b+1} = 0.  The admissible set is

    S = { s : 1 >= s_1 >= s_2 >= ... >= s_b >= 0 }.

This module holds the system parameters, the drift f(s), the equilibrium
solver, a fixed-step ODE integrator, and the weighted-L1 Lyapunov
apparatus (weights w_k and decay rate delta0) used by the verification
battery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "SystemParams",
    "Equilibrium",
    "LyapunovWeights",
    "Trajectory",
    "SolverError",
    "arrival_rate",
    "in_state_space",
    "drift",
    "f_tilde",
    "equilibrium",
    "integrate",
    "lyapunov_weights",
    "check_lyapunov_decay",
    "taylor_check",
]

# Buffer levels k with equilibrium tail s*_k below this are numerically inert.
AUTO_BUFFER_TAIL = 1e-10
AUTO_BUFFER_CAP = 64


class SolverError(RuntimeError):
    """Equilibrium or ODE solver could not meet its contract."""


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the N-server system.

    The arrival rate is lam = 1 - gamma / N**alpha, so alpha > 0 drives
    the load toward one as N grows (heavy traffic) while alpha = 0 keeps
    it constant (light traffic).  ``buffer`` is the per-server queue cap;
    "auto" picks the smallest b whose equilibrium tail is below
    ``AUTO_BUFFER_TAIL`` (capped at ``AUTO_BUFFER_CAP``).
    """

    n_servers: int
    gamma: float
    alpha: float
    buffer: int | str = "auto"
    xi: float = 0.01

    def __post_init__(self):
        if not (isinstance(self.n_servers, (int, np.integer)) and self.n_servers >= 1):
            raise ValueError(f"n_servers must be a positive integer, got {self.n_servers}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.xi <= 0.0:
            raise ValueError(f"xi must be > 0, got {self.xi}")
        lam = 1.0 - self.gamma / self.n_servers**self.alpha
        if not 0.0 < lam < 1.0:
            raise ValueError(
                f"derived arrival rate {lam} outside (0, 1); "
                f"(N={self.n_servers}, gamma={self.gamma}, alpha={self.alpha})"
            )
        if self.buffer == "auto":
            object.__setattr__(self, "buffer", _auto_buffer(lam))
        elif isinstance(self.buffer, (int, np.integer)) and self.buffer >= 1:
            object.__setattr__(self, "buffer", int(self.buffer))
        else:
            raise ValueError(f"buffer must be a positive integer or 'auto', got {self.buffer}")

    @property
    def lam(self) -> float:
        """Arrival rate per server, lam = 1 - gamma / N**alpha."""
        return 1.0 - self.gamma / self.n_servers**self.alpha


def _auto_buffer(lam: float) -> int:
    # s*_k <= lam**(2**k - 1), so this b makes the equilibrium tail negligible.
    for b in range(1, AUTO_BUFFER_CAP + 1):
        if lam ** (2**b - 1) < AUTO_BUFFER_TAIL:
            return b
    return AUTO_BUFFER_CAP


def arrival_rate(params: SystemParams) -> float:
    """Per-server arrival rate lam = 1 - gamma / N**alpha."""
    return params.lam


def in_state_space(s: np.ndarray, slack: float = 1e-9) -> bool:
    """True if 1 >= s_1 >= ... >= s_b >= 0 holds up to ``slack``."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or s.size == 0:
        return False
    ext = np.concatenate(([1.0], s, [0.0]))
    return bool(np.all(np.diff(ext) <= slack))


def _check_dim(s: np.ndarray, params: SystemParams) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (params.buffer,):
        raise ValueError(f"state has shape {s.shape}, expected ({params.buffer},)")
    return s


def drift(s: np.ndarray, params: SystemParams) -> np.ndarray:
    """Mean-field drift f(s).

    f_k = lam (s_{k-1}^2 - s_k^2) - (s_k - s_{k+1}) for k < b and
    f_b = lam (s_{b-1}^2 - s_b^2) - s_b, with s_0 = 1, s_{b+1} = 0.
    """
    s = _check_dim(s, params)
    ext = np.concatenate(([1.0], s, [0.0]))
    return params.lam * (ext[:-2] ** 2 - ext[1:-1] ** 2) - (ext[1:-1] - ext[2:])


def f_tilde(s: np.ndarray, params: SystemParams) -> np.ndarray:
    """Half-sum of flow rates, f~_k = (lam (s_{k-1}^2 - s_k^2) + (s_k - s_{k+1})) / 2.

    At the equilibrium both flows balance, so f~_k(s*) equals
    lam ((s*_{k-1})^2 - (s*_k)^2).
    """
    s = _check_dim(s, params)
    ext = np.concatenate(([1.0], s, [0.0]))
    return 0.5 * (params.lam * (ext[:-2] ** 2 - ext[1:-1] ** 2) + (ext[1:-1] - ext[2:]))


@dataclass(frozen=True)
class Equilibrium:
    """Fixed point of the mean-field drift with a residual certificate."""

    s_star: np.ndarray
    residual: float


def equilibrium(params: SystemParams, tol: float = 1e-12, max_iter: int = 200) -> Equilibrium:
    """Solve f(s*) = 0 by bisection on the terminal value v = s*_b.

    Summing the fixed-point equations from index k to b telescopes to
    s*_k = lam ((s*_{k-1})^2 - (s*_b)^2), so a candidate v determines the
    whole vector by the forward recursion s_1(v) = lam (1 - v^2),
    s_k(v) = lam (s_{k-1}(v)^2 - v^2).  The scalar residual
    rho(v) = s_b(v) - v crosses zero at the unique equilibrium.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam, b = params.lam, params.buffer

    def forward(v: float) -> np.ndarray:
        s = np.empty(b)
        prev = 1.0
        v2 = v * v
        for k in range(b):
            prev = lam * (prev * prev - v2)
            s[k] = prev
        return s

    lo, hi = 0.0, lam
    # rho(0) >= 0 always (it underflows to exactly 0.0 for oversized buffers).
    rho_lo = forward(lo)[-1] - lo
    rho_hi = forward(hi)[-1] - hi
    if rho_lo < 0.0 or rho_hi >= 0.0:
        raise SolverError(
            f"bisection bracket failure: rho(0)={rho_lo}, rho(lam)={rho_hi}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if forward(mid)[-1] - mid >= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17:
            break
    s = np.clip(forward(0.5 * (lo + hi)), 0.0, 1.0)
    # repair sub-roundoff wiggles, then insist on membership in S
    s = np.minimum.accumulate(s)
    residual = float(np.max(np.abs(drift(s, params))))
    if residual > tol:
        raise SolverError(
            f"equilibrium did not converge: residual {residual:.3e} > tol {tol:.1e}"
        )
    return Equilibrium(s_star=s, residual=residual)


class Trajectory(NamedTuple):
    """Sampled ODE path: times[i] is the time of states[i]."""

    times: np.ndarray
    states: np.ndarray


def integrate(s0: np.ndarray, t_end: float, dt: float, params: SystemParams) -> Trajectory:
    """Integrate ds/dt = f(s) with fixed-step RK4 from s0.

    Each step is clamped into [0, 1] so tiny overshoots cannot leave the
    admissible set; a NaN step raises (dt too large for the dynamics).
    """
    s0 = _check_dim(s0, params)
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if not in_state_space(s0):
        raise ValueError("s0 is not in the admissible set")
    steps = int(round(t_end / dt))
    states = np.empty((steps + 1, s0.size))
    states[0] = s0
    s = s0.astype(float)
    for i in range(steps):
        k1 = drift(s, params)
        k2 = drift(np.clip(s + 0.5 * dt * k1, 0.0, 1.0), params)
        k3 = drift(np.clip(s + 0.5 * dt * k2, 0.0, 1.0), params)
        k4 = drift(np.clip(s + dt * k3, 0.0, 1.0), params)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise SolverError(f"integration produced NaN at step {i}; reduce dt")
        s = np.clip(s, 0.0, 1.0)
        states[i + 1] = s
    return Trajectory(times=np.arange(steps + 1) * dt, states=states)


@dataclass(frozen=True)
class LyapunovWeights:
    """Weights of V(x) = sum_k w_k |x_k| and its exponential decay rate."""

    epsilon: float
    k_tilde: float
    w: np.ndarray
    delta0: float


def lyapunov_weights(params: SystemParams) -> LyapunovWeights:
    """Build the weighted-L1 Lyapunov certificate for the drift.

    epsilon is taken as the midpoint of its feasibility interval
    (2 - 2 lam,  min{0.5, 2**((alpha+2 xi)/(alpha+xi)) - 2 lam}), which is
    nonempty exactly when lam > 0.75.  Weights grow geometrically up to
    level ceil(k~) with k~ = (alpha + xi) log2 N and linearly afterwards;
    delta0 = (1 - sqrt(lam)) / (6 (2 lam + epsilon)**k~).
    """
    lam, b = params.lam, params.buffer
    lo = 2.0 - 2.0 * lam
    hi = min(0.5, 2.0 ** ((params.alpha + 2.0 * params.xi) / (params.alpha + params.xi)) - 2.0 * lam)
    if lam <= 0.75 or lo >= hi:
        raise ValueError(
            f"Lyapunov weights need lam > 0.75 for a nonempty epsilon interval "
            f"(lam={lam:.4f}, interval=({lo:.4f}, {hi:.4f}))"
        )
    eps = 0.5 * (lo + hi)
    k_tilde = (params.alpha + params.xi) * math.log2(params.n_servers)
    base = 2.0 * lam + eps
    switch = math.ceil(k_tilde)
    w = np.empty(b)
    w[0] = 1.0
    linear_inc = 0.5 / base**k_tilde
    for k in range(2, b + 1):
        inc = 0.5 / base ** (k - 1) if k <= switch else linear_inc
        w[k - 1] = w[k - 2] + inc
    delta0 = (1.0 - math.sqrt(lam)) / (6.0 * base**k_tilde)
    return LyapunovWeights(epsilon=eps, k_tilde=k_tilde, w=w, delta0=delta0)


def check_lyapunov_decay(
    traj: Trajectory,
    weights: LyapunovWeights,
    s_star: np.ndarray,
    max_samples: int = 200,
) -> float:
    """Largest multiplicative violation of V(x(t_j)) <= V(x(t_i)) e^{-delta0 (t_j - t_i)}.

    Checks all sampled pairs i < j (the trajectory is thinned to at most
    ``max_samples`` points) and returns max over pairs of
    V_j / (V_i e^{-delta0 dt}) - 1, floored at zero.  Report-only: the
    caller decides what violation level is acceptable.
    """
    idx = np.unique(np.linspace(0, len(traj.times) - 1, max_samples).astype(int))
    v = np.abs(traj.states[idx] - np.asarray(s_star)) @ weights.w
    t = traj.times[idx]
    worst = 0.0
    for a in range(len(idx) - 1):
        if v[a] <= 1e-300:
            continue  # started (numerically) at the fixed point
        allowed = v[a] * np.exp(-weights.delta0 * (t[a + 1 :] - t[a]))
        worst = max(worst, float(np.max(v[a + 1 :] / allowed)) - 1.0)
    return max(worst, 0.0)


def taylor_check(s: np.ndarray, s_star: np.ndarray, params: SystemParams) -> float:
    """Residual of the exact second-order expansion of f around s_star.

    The drift is a quadratic polynomial, so when s_star is the true
    equilibrium (f(s_star) = 0),

        f(s) = J(s*) (s - s*) + lam ((x_{k-1})^2 - (x_k)^2)_k,  x = s - s*,

    holds identically and the returned norm is at roundoff level.
    """
    from .tridiag import jacobian  # local import; tridiag depends on this module

    s = _check_dim(s, params)
    s_star = _check_dim(s_star, params)
    x = s - s_star
    xe = np.concatenate(([0.0], x))
    quad = params.lam * (xe[:-1] ** 2 - xe[1:] ** 2)
    jac = jacobian(s_star, params)
    linear = jac.matvec(x)
    return float(np.linalg.norm(drift(s, params) - linear - quad))
