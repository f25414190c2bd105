"""Stochastic simulation of the exact N-server CTMC.

The chain is simulated on the aggregate occupancy counts
m_k = N s_k (number of servers with at least k jobs), which is exact for
the load-balancing dynamics: an arrival samples two servers with
replacement, which reproduces the s^2 arrival rates, and a departure
picks a busy server uniformly.  Cost per step is O(b) and memory is
independent of N.

Two schemes are provided: a uniformized chain driven at constant rate
N (1 + lam) whose plain step average is stationary-consistent, and an
event-driven (Gillespie) chain with exponential holding times and
time-weighted averages as a cross-check.

Replica streams are derived from a counter-based generator (Philox) via
seed spawning, so results are reproducible bit for bit and replicas are
statistically independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .meanfield import SystemParams, equilibrium

__all__ = [
    "AggregateState",
    "SimConfig",
    "TailConfig",
    "SimStats",
    "initial_state",
    "step_uniformized",
    "step_gillespie",
    "run",
]

CHUNK_STEPS = 1 << 20

SCHEMES = ("uniformization", "gillespie")


@dataclass(frozen=True)
class AggregateState:
    """Occupancy counts m_k = number of servers with queue length >= k."""

    m: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=np.int64))
        ext = np.concatenate(([self.n], self.m, [0]))
        if np.any(np.diff(ext) > 0):
            raise ValueError(f"occupancy counts must satisfy N >= m_1 >= ... >= m_b >= 0, got {self.m}")

    @property
    def fractions(self) -> np.ndarray:
        return self.m / self.n


@dataclass(frozen=True)
class SimConfig:
    """Length, replication, and scheme of one simulation experiment."""

    steps: int
    seed: int
    warmup_fraction: float = 0.1
    replicas: int = 10
    scheme: str = "uniformization"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


@dataclass(frozen=True)
class TailConfig:
    """Concentration tail estimate: P(||S - s*||^{2r} >= N^{-epsilon})."""

    r: int
    epsilon: float

    def __post_init__(self):
        if self.r < 1 or self.epsilon <= 0.0:
            raise ValueError("need r >= 1 and epsilon > 0")


@dataclass(frozen=True)
class SimStats:
    """Steady-state estimates with replica-level statistics."""

    mse_mean: float
    scaled_mse: float
    replica_values: np.ndarray
    std_error: float
    occupancy_mean: np.ndarray
    tail_prob: Optional[float] = None


def initial_state(params: SystemParams, s_star: np.ndarray) -> AggregateState:
    """Discretized equilibrium: round(N s*), repaired to monotone."""
    m = np.round(params.n_servers * np.asarray(s_star)).astype(np.int64)
    m = np.minimum.accumulate(np.clip(m, 0, params.n_servers))
    return AggregateState(m=m, n=params.n_servers)


def step_uniformized(
    state: AggregateState, rng: np.random.Generator, params: SystemParams
) -> AggregateState:
    """One step of the uniformized chain (rate N (1 + lam)).

    With probability lam / (1 + lam) an arrival samples two servers with
    replacement and joins the less loaded one (dropped if both are full);
    otherwise a uniformly sampled server completes a job if busy.
    Consumes exactly three uniforms, matching the batch kernel.
    """
    lam = params.lam
    u = rng.random(3)
    m = state.m.copy()
    n, b = state.n, m.shape[0]
    if u[0] < lam / (1.0 + lam):
        i = max(int(u[1] * n), int(u[2] * n))
        q = int(np.searchsorted(-m, -i, side="left"))  # count of m_k > i
        if q < b:
            m[q] += 1
    else:
        i = int(u[1] * n)
        q = int(np.searchsorted(-m, -i, side="left"))
        if q >= 1:
            m[q - 1] -= 1
    return AggregateState(m=m, n=n)


def step_gillespie(
    state: AggregateState, rng: np.random.Generator, params: SystemParams
) -> tuple[AggregateState, float]:
    """One event of the event-driven chain; returns (new state, holding time).

    The total event rate is lam N + m_1; blocked arrivals and arrivals to
    full pairs are kept as self-loops, which does not alter the
    time-weighted stationary law.  Consumes exactly four uniforms.
    """
    lam = params.lam
    u = rng.random(4)
    m = state.m.copy()
    n, b = state.n, m.shape[0]
    total = lam * n + m[0]
    holding = float(-np.log1p(-u[1]) / total)
    if u[0] * total < lam * n:
        i = max(int(u[2] * n), int(u[3] * n))
        q = int(np.searchsorted(-m, -i, side="left"))
        if q < b:
            m[q] += 1
    else:
        i = int(u[2] * m[0])
        q = int(np.searchsorted(-m, -i, side="left"))
        m[q - 1] -= 1
    return AggregateState(m=m, n=n), holding


def _replica_rng(seed: int, replica: int) -> np.random.Generator:
    # Philox is counter-based; spawn keys give independent replica streams
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replica,))))


def run(
    params: SystemParams, config: SimConfig, tail: Optional[TailConfig] = None
) -> SimStats:
    """Estimate the steady-state mean-square error E||S - s*||^2.

    Each replica starts at the discretized equilibrium, discards the
    first ``warmup_fraction`` of its steps, and averages
    ||m/N - s*||^2 over the rest (step average under uniformization,
    time-weighted average under the Gillespie scheme).  The replica mean
    and the replica-level standard error are reported, along with the
    optional tail exceedance estimate.
    """
    eq = equilibrium(params)
    s_star = eq.s_star
    n = params.n_servers
    m0 = initial_state(params, s_star).m
    warmup = int(config.steps * config.warmup_fraction)
    measured = config.steps - warmup
    if measured < 1:
        raise ValueError("no steps left after warmup")
    tail_thr = np.inf
    if tail is not None:
        # ||S - s*||^{2r} >= N^{-eps}  <=>  ||S - s*||^2 >= N^{-eps/r}
        tail_thr = float(n ** (-tail.epsilon / tail.r))

    mse_vals = np.empty(config.replicas)
    tail_vals = np.empty(config.replicas)
    occ_vals = np.empty((config.replicas, params.buffer))
    for r in range(config.replicas):
        rng = _replica_rng(config.seed, r)
        m = m0.copy()
        if config.scheme == "uniformization":
            mse_vals[r], tail_vals[r], occ_vals[r] = _run_uniformized(
                m, rng, params, config.steps, warmup, s_star, tail_thr
            )
        else:
            mse_vals[r], tail_vals[r], occ_vals[r] = _run_gillespie(
                m, rng, params, config.steps, warmup, s_star, tail_thr
            )

    mse_mean = float(mse_vals.mean())
    std_error = (
        float(mse_vals.std(ddof=1) / np.sqrt(config.replicas))
        if config.replicas > 1
        else 0.0
    )
    return SimStats(
        mse_mean=mse_mean,
        scaled_mse=n * mse_mean,
        replica_values=mse_vals,
        std_error=std_error,
        occupancy_mean=occ_vals.mean(axis=0),
        tail_prob=float(tail_vals.mean()) if tail is not None else None,
    )


def _run_uniformized(m, rng, params, steps, warmup, s_star, tail_thr):
    p_arrival = params.lam / (1.0 + params.lam)
    n = params.n_servers
    acc_sq = 0.0
    acc_tail = 0
    acc_occ = np.zeros(params.buffer, dtype=np.int64)
    done = 0
    while done < steps:
        size = min(CHUNK_STEPS, steps - done)
        if done < warmup < done + size:
            size = warmup - done  # split the chunk at the warmup boundary
        u = rng.random((size, 3))
        accumulate = done >= warmup
        sq, tl, occ = _kernels.uniformized_chunk(
            m, u, p_arrival, n, s_star, tail_thr, accumulate
        )
        if accumulate:
            acc_sq += sq
            acc_tail += tl
            acc_occ += occ
        done += size
    measured = steps - warmup
    return acc_sq / measured, acc_tail / measured, acc_occ / (measured * n)


def _run_gillespie(m, rng, params, steps, warmup, s_star, tail_thr):
    n = params.n_servers
    acc_sq = 0.0
    acc_tail = 0.0
    acc_occ = np.zeros(params.buffer)
    acc_time = 0.0
    done = 0
    while done < steps:
        size = min(CHUNK_STEPS, steps - done)
        if done < warmup < done + size:
            size = warmup - done
        u = rng.random((size, 4))
        accumulate = done >= warmup
        sq, tl, occ, tt = _kernels.gillespie_chunk(
            m, u, params.lam, n, s_star, tail_thr, accumulate
        )
        if accumulate:
            acc_sq += sq
            acc_tail += tl
            acc_occ += occ
            acc_time += tt
        done += size
    return acc_sq / acc_time, acc_tail / acc_time, acc_occ / (acc_time * n)
