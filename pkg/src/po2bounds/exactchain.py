"""Exact stationary analysis of the occupancy CTMC at small (N, b).

State m = (m_1, ..., m_b) counts servers with queue length >= k, so
N >= m_1 >= ... >= m_b >= 0.  Transition rates, with m_0 = N and
m_{b+1} = 0:

    m -> m + e_k  at  (lam / N) (m_{k-1}^2 - m_k^2)   (arrival joins level k)
    m -> m - e_k  at  m_k - m_{k+1}                    (departure from level k)

This brute-force solve is the trusted oracle behind the simulator
acceptance tests; the state count C(N+b, b) is capped to keep it a test
device.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg
import scipy.sparse

from .meanfield import SystemParams

__all__ = [
    "LatticeStateSpace",
    "GeneratorMatrix",
    "StationaryDistribution",
    "StateSpaceTooLarge",
    "MAX_STATES",
    "DENSE_SOLVE_LIMIT",
    "build_generator",
    "stationary",
    "exact_mse",
]

MAX_STATES = 200_000
DENSE_SOLVE_LIMIT = 5_000


class StateSpaceTooLarge(ValueError):
    """State count exceeds the oracle guard."""


@dataclass(frozen=True)
class LatticeStateSpace:
    """Enumeration of all monotone occupancy vectors for (N, b)."""

    n: int
    b: int
    states: np.ndarray = field(repr=False)  # (count, b) int64, lexicographic
    index: dict = field(repr=False)  # occupancy tuple -> row

    @classmethod
    def build(cls, n: int, b: int) -> "LatticeStateSpace":
        count = comb(n + b, b)
        if count > MAX_STATES:
            raise StateSpaceTooLarge(
                f"C({n}+{b}, {b}) = {count} states exceeds cap {MAX_STATES}"
            )
        # nondecreasing tuples in lexicographic order; reversing each gives
        # the monotone-nonincreasing occupancy vector
        tuples = [
            t[::-1] for t in itertools.combinations_with_replacement(range(n + 1), b)
        ]
        states = np.array(tuples, dtype=np.int64).reshape(count, b)
        return cls(n=n, b=b, states=states, index={t: i for i, t in enumerate(tuples)})

    @property
    def count(self) -> int:
        return self.states.shape[0]

    def index_of(self, m) -> int:
        return self.index[tuple(int(v) for v in m)]


@dataclass(frozen=True)
class GeneratorMatrix:
    """Sparse CTMC generator over a LatticeStateSpace (rows sum to zero)."""

    space: LatticeStateSpace
    matrix: scipy.sparse.csr_matrix = field(repr=False)


def build_generator(params: SystemParams) -> GeneratorMatrix:
    """Assemble the sparse generator for the occupancy chain."""
    space = LatticeStateSpace.build(params.n_servers, params.buffer)
    n, b, lam = params.n_servers, params.buffer, params.lam
    rows, cols, vals = [], [], []
    for i, m in enumerate(space.states.tolist()):
        ext = [n] + m + [0]
        diag = 0.0
        for k in range(1, b + 1):
            up = lam / n * (ext[k - 1] ** 2 - ext[k] ** 2)
            if up > 0.0:
                tgt = list(m)
                tgt[k - 1] += 1
                rows.append(i)
                cols.append(space.index[tuple(tgt)])
                vals.append(up)
                diag += up
            down = float(ext[k] - ext[k + 1])
            if down > 0.0:
                tgt = list(m)
                tgt[k - 1] -= 1
                rows.append(i)
                cols.append(space.index[tuple(tgt)])
                vals.append(down)
                diag += down
        rows.append(i)
        cols.append(i)
        vals.append(-diag)
    matrix = scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(space.count, space.count)
    )
    return GeneratorMatrix(space=space, matrix=matrix)


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary law pi with residual ||pi Q||_inf."""

    space: LatticeStateSpace
    pi: np.ndarray = field(repr=False)
    residual: float = 0.0


def stationary(
    gen: GeneratorMatrix, tol: float = 1e-10, max_iter: int = 2_000_000
) -> StationaryDistribution:
    """Solve pi Q = 0, sum(pi) = 1.

    Small chains get a dense LU solve of Q^T with the last equation
    replaced by normalization; larger ones run power iteration on the
    uniformized kernel P = I + Q / Lambda with Lambda = max exit rate + 1.
    """
    q = gen.matrix
    count = gen.space.count
    if count <= DENSE_SOLVE_LIMIT:
        a = q.toarray().T
        a[-1, :] = 1.0
        rhs = np.zeros(count)
        rhs[-1] = 1.0
        pi = scipy.linalg.solve(a, rhs)
    else:
        rate = float(np.max(-q.diagonal())) + 1.0
        pt = (scipy.sparse.eye(count, format="csr") + q * (1.0 / rate)).T.tocsr()
        pi = np.full(count, 1.0 / count)
        for _ in range(max_iter):
            nxt = pt @ pi
            nxt /= nxt.sum()
            # step difference times Lambda equals ||pi Q||_inf up to roundoff
            if np.max(np.abs(nxt - pi)) * rate <= 0.5 * tol:
                pi = nxt
                break
            pi = nxt
        else:
            raise RuntimeError(f"power iteration did not converge in {max_iter} sweeps")
    pi = np.maximum(pi, 0.0)
    pi /= pi.sum()
    residual = float(np.max(np.abs(pi @ q)))
    if residual > tol:
        raise RuntimeError(f"stationary residual {residual:.3e} exceeds tol {tol:.1e}")
    return StationaryDistribution(space=gen.space, pi=pi, residual=residual)


def exact_mse(
    dist: StationaryDistribution, s_star: np.ndarray, params: SystemParams
) -> float:
    """E||S - s*||^2 under the exact stationary law."""
    s_star = np.asarray(s_star, dtype=float)
    if s_star.shape != (dist.space.b,):
        raise ValueError(f"s_star has shape {s_star.shape}, expected ({dist.space.b},)")
    frac = dist.space.states / params.n_servers
    return float(dist.pi @ np.sum((frac - s_star) ** 2, axis=1))
