"""JIT-compiled inner loops for the stochastic simulator.

Both kernels consume pre-drawn uniforms (a fixed number per step) so a
replica's path is a pure function of its counter-based random stream:
bit-identical across runs, platforms, and chunk sizes.  Level lookups
exploit monotonicity of m: the level of a sampled server index u is the
number of entries with m_k > u.

Accumulators are returned per chunk; squared distances are recomputed
from scratch at each chunk entry so incremental roundoff cannot drift
over long runs.
"""

import numpy as np
from numba import njit

__all__ = ["uniformized_chunk", "gillespie_chunk"]


@njit(cache=True)
def uniformized_chunk(m, u, p_arrival, n, s_star, tail_thr, accumulate):
    """Advance the uniformized chain by u.shape[0] steps (m updated in place).

    Per step: u[t, 0] picks arrival vs departure, u[t, 1] and u[t, 2] are
    the sampled server indices (departures use u[t, 1] only).  Returns
    (sum of ||m/N - s*||^2 over post-step states, tail exceedance count,
    occupancy integrals sum_t m(t)); contents are meaningful only when
    ``accumulate`` is set.
    """
    b = m.shape[0]
    inv_n = 1.0 / n
    sq = 0.0
    for k in range(b):
        d = m[k] * inv_n - s_star[k]
        sq += d * d
    steps = u.shape[0]
    acc_sq = 0.0
    tail = 0
    # occupancy integral via change-time weighting: a change of size delta at
    # step t (0-based) contributes to the (steps - t) following states, so
    # occ = steps * m(entry) + sum over changes of (steps - t) * delta
    occ = np.zeros(b, dtype=np.int64)
    if accumulate:
        for k in range(b):
            occ[k] = steps * m[k]
    for t in range(steps):
        if u[t, 0] < p_arrival:
            # arrival: the less-loaded sample's level is set by the larger index
            i1 = int(u[t, 1] * n)
            i2 = int(u[t, 2] * n)
            if i2 > i1:
                i1 = i2
            q = 0
            while q < b and m[q] > i1:
                q += 1
            if q < b:  # else both sampled servers are full: drop
                old = m[q] * inv_n - s_star[q]
                m[q] += 1
                new = m[q] * inv_n - s_star[q]
                sq += new * new - old * old
                occ[q] += steps - t
        else:
            i1 = int(u[t, 1] * n)
            q = 0
            while q < b and m[q] > i1:
                q += 1
            if q >= 1:  # else sampled server is idle: self-loop
                old = m[q - 1] * inv_n - s_star[q - 1]
                m[q - 1] -= 1
                new = m[q - 1] * inv_n - s_star[q - 1]
                sq += new * new - old * old
                occ[q - 1] -= steps - t
        if accumulate:
            acc_sq += sq
            if sq >= tail_thr:
                tail += 1
    return acc_sq, tail, occ


@njit(cache=True)
def gillespie_chunk(m, u, lam, n, s_star, tail_thr, accumulate):
    """Advance the event-driven chain by u.shape[0] events (m updated in place).

    Per event: u[t, 0] picks the event class, u[t, 1] feeds the holding
    time, u[t, 2] and u[t, 3] are server indices.  The event rate is
    lam N + m_1 (blocked arrivals ride along as self-loops, which leaves
    the time-weighted law unchanged).  Returns (time-weighted sum of
    ||m/N - s*||^2, time-weighted tail exceedance, time-weighted
    occupancy sums, total weighted time).
    """
    b = m.shape[0]
    inv_n = 1.0 / n
    arrival_rate = lam * n
    sq = 0.0
    for k in range(b):
        d = m[k] * inv_n - s_star[k]
        sq += d * d
    steps = u.shape[0]
    acc_sq = 0.0
    tail_time = 0.0
    occ = np.zeros(b, dtype=np.float64)
    total_time = 0.0
    for t in range(steps):
        total = arrival_rate + m[0]
        dt = -np.log1p(-u[t, 1]) / total
        if accumulate:
            acc_sq += sq * dt
            total_time += dt
            if sq >= tail_thr:
                tail_time += dt
            for k in range(b):
                occ[k] += m[k] * dt
        if u[t, 0] * total < arrival_rate:
            i1 = int(u[t, 2] * n)
            i2 = int(u[t, 3] * n)
            if i2 > i1:
                i1 = i2
            q = 0
            while q < b and m[q] > i1:
                q += 1
            if q < b:
                old = m[q] * inv_n - s_star[q]
                m[q] += 1
                new = m[q] * inv_n - s_star[q]
                sq += new * new - old * old
        else:
            # a departure event implies m[0] >= 1, so the scan lands at q >= 1
            i1 = int(u[t, 2] * m[0])
            q = 0
            while q < b and m[q] > i1:
                q += 1
            old = m[q - 1] * inv_n - s_star[q - 1]
            m[q - 1] -= 1
            new = m[q - 1] * inv_n - s_star[q - 1]
            sq += new * new - old * old
    return acc_sq, tail_time, occ, total_time
