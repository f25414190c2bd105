"""Tridiagonal machinery for the drift Jacobian.

The Jacobian of the mean-field drift at s is tridiagonal:

    diag_i  = -2 lam s_i - 1
    super_i = 1
    sub_i   = 2 lam s_i        (row i+1, column i)

Its leading principal minors P_i obey a three-term recursion whose
ratios C_k = P_k / P_{k-1} are backward continued-fraction convergents;
the inverse diagonal is a product series in those convergents.  A banded
LU solve provides an independent route to the same quantities, and the
spectrum comes from symmetrizing and Sturm-sequence bisection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .meanfield import SystemParams

__all__ = [
    "Tridiagonal",
    "SpectrumReport",
    "SingularMatrixError",
    "jacobian",
    "determinants",
    "determinants_shortform",
    "convergents",
    "inverse_diagonal",
    "solve",
    "inverse_entry",
    "spectrum",
]

# Continued-fraction tail products below this cannot move the partial sum.
PRODUCT_UNDERFLOW = 1e-30


class SingularMatrixError(np.linalg.LinAlgError):
    """Matrix is singular (or a pivot broke down) where invertibility is required."""


@dataclass(frozen=True)
class Tridiagonal:
    """Tridiagonal matrix stored as three diagonals.

    ``sub`` and ``sup`` have length n-1; ``sub[i]`` sits at row i+1,
    column i and ``sup[i]`` at row i, column i+1.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sub", np.asarray(self.sub, dtype=float))
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=float))
        object.__setattr__(self, "sup", np.asarray(self.sup, dtype=float))
        n = self.diag.size
        if n < 1 or self.sub.size != n - 1 or self.sup.size != n - 1:
            raise ValueError(
                f"inconsistent diagonal lengths: sub {self.sub.size}, "
                f"diag {n}, sup {self.sup.size}"
            )

    @property
    def n(self) -> int:
        return self.diag.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        return y

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        a += np.diag(self.sup, 1)
        a += np.diag(self.sub, -1)
        return a

    def transpose(self) -> "Tridiagonal":
        return Tridiagonal(sub=self.sup.copy(), diag=self.diag.copy(), sup=self.sub.copy())


def jacobian(s: np.ndarray, params: SystemParams) -> Tridiagonal:
    """Drift Jacobian J(s) for the load-balancing mean-field model."""
    s = np.asarray(s, dtype=float)
    if s.shape != (params.buffer,):
        raise ValueError(f"state has shape {s.shape}, expected ({params.buffer},)")
    lam = params.lam
    return Tridiagonal(
        sub=2.0 * lam * s[:-1],
        diag=-2.0 * lam * s - 1.0,
        sup=np.ones(params.buffer - 1),
    )


def determinants(t: Tridiagonal) -> np.ndarray:
    """Leading principal minors P_0..P_n via P_i = x_i P_{i-1} - y_{i-1} z_{i-1} P_{i-2}.

    P_0 = 1 by convention; P_n is det(T).  For Jacobian instances the
    signs alternate and |P_i| >= 1.
    """
    n = t.n
    p = np.empty(n + 1)
    p[0] = 1.0
    prev2 = 0.0  # P_{-1}
    for i in range(1, n + 1):
        val = t.diag[i - 1] * p[i - 1]
        if i >= 2:
            val -= t.sup[i - 2] * t.sub[i - 2] * prev2
        prev2 = p[i - 1]
        p[i] = val
    return p


def determinants_shortform(t: Tridiagonal) -> np.ndarray:
    """Jacobian-only minor recursion P_i = (-1)^i - 2 lam s_i P_{i-1}.

    Valid when ``t`` has the Jacobian structure (sup = 1, and each
    diag_i = -2 lam s_i - 1, so 2 lam s_i is recovered as -(diag_i + 1)).
    Cross-checks the general recursion in the verification battery.
    """
    n = t.n
    p = np.empty(n + 1)
    p[0] = 1.0
    for i in range(1, n + 1):
        two_lam_s = -(t.diag[i - 1] + 1.0)
        p[i] = (-1.0) ** i - two_lam_s * p[i - 1]
    return p


def convergents(t: Tridiagonal) -> np.ndarray:
    """Backward continued-fraction convergents C_k = P_k / P_{k-1}, k = 1..n.

    All strictly negative for Jacobian instances (minor signs alternate).
    """
    p = determinants(t)
    if np.any(p[:-1] == 0.0):
        raise SingularMatrixError("zero leading principal minor; convergents undefined")
    return p[1:] / p[:-1]


def inverse_diagonal(t: Tridiagonal) -> np.ndarray:
    """Diagonal of T^{-1} via the convergent product series.

    (T^{-1})_{ii} = 1/C_i + sum_{k>i} (1/C_k) prod_{t=i}^{k-1} y_t z_t / C_t^2.

    The running product is accumulated left to right and dropped once it
    falls below ``PRODUCT_UNDERFLOW``; a zero sub-diagonal entry (a
    decoupled tail block) zeroes the product and ends the series exactly.
    """
    c = convergents(t)
    n = t.n
    out = np.empty(n)
    yz = t.sup * t.sub
    for i in range(1, n + 1):
        total = 1.0 / c[i - 1]
        prod = 1.0
        for k in range(i + 1, n + 1):
            prod *= yz[k - 2] / c[k - 2] ** 2
            if abs(prod) < PRODUCT_UNDERFLOW:
                break
            total += prod / c[k - 1]
        out[i - 1] = total
    return out


def solve(t: Tridiagonal, rhs: np.ndarray) -> np.ndarray:
    """Solve T x = rhs with a banded LU factorization (partial pivoting)."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != t.n:
        raise ValueError(f"rhs length {rhs.shape[0]} != matrix dimension {t.n}")
    if t.n == 1:
        if t.diag[0] == 0.0:
            raise SingularMatrixError("singular 1x1 system")
        return rhs / t.diag[0]
    ab = np.zeros((3, t.n))
    ab[0, 1:] = t.sup
    ab[1, :] = t.diag
    ab[2, :-1] = t.sub
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"pivot breakdown in banded solve: {exc}") from exc


def inverse_entry(t: Tridiagonal, i: int, j: int) -> float:
    """(T^{-1})_{ij} via a unit-vector solve (0-based indices)."""
    if not (0 <= i < t.n and 0 <= j < t.n):
        raise IndexError(f"indices ({i}, {j}) out of range for dimension {t.n}")
    e = np.zeros(t.n)
    e[j] = 1.0
    return float(solve(t, e)[i])


@dataclass(frozen=True)
class SpectrumReport:
    """All real eigenvalues in ascending order."""

    eigenvalues: np.ndarray
    max_eig: float


def spectrum(t: Tridiagonal, tol: float = 1e-10) -> SpectrumReport:
    """All eigenvalues by symmetrization and Sturm-sequence bisection.

    Requires sup_i * sub_i >= 0.  Where the product is positive the matrix
    is diagonally similar to a symmetric tridiagonal with off-diagonals
    sqrt(sup_i sub_i); rows with a zero coupling decouple into independent
    blocks, which are handled by splitting.
    """
    yz = t.sup * t.sub
    if np.any(yz < 0.0):
        raise ValueError("sup_i * sub_i < 0: spectrum may be complex, refusing")
    eigs: list[float] = []
    start = 0
    boundaries = list(np.flatnonzero(yz == 0.0) + 1) + [t.n]
    for end in boundaries:
        d = t.diag[start:end]
        e = np.sqrt(yz[start : end - 1])
        eigs.extend(_sturm_eigenvalues(d, e, tol))
        start = end
    ev = np.sort(np.asarray(eigs))
    return SpectrumReport(eigenvalues=ev, max_eig=float(ev[-1]))


def _sturm_count(d: np.ndarray, e2: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below x."""
    count = 0
    q = 1.0
    for i in range(d.size):
        q = d[i] - x - (e2[i - 1] / q if i > 0 else 0.0)
        if q == 0.0:
            q = -1e-300  # nudge off the exact pole; bisection tolerance absorbs it
        if q < 0.0:
            count += 1
    return count


def _sturm_eigenvalues(d: np.ndarray, e: np.ndarray, tol: float) -> list[float]:
    m = d.size
    if m == 1:
        return [float(d[0])]
    e2 = e * e
    rad = np.zeros(m)
    rad[:-1] += np.abs(e)
    rad[1:] += np.abs(e)
    lo0 = float(np.min(d - rad))
    hi0 = float(np.max(d + rad))
    out = []
    for k in range(m):
        lo, hi = lo0, hi0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _sturm_count(d, e2, mid) <= k:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out
