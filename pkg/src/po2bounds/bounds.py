"""Calculable error bounds for the mean-field approximation.

The steady-state mean-square error E||S - s*||^2 has the asymptotically
exact dominant term

    -(1/N) sum_i [J^T(s*)]^{-1}_{ii} f~_i(s*),

and four times that is an upper bound valid for large finite N.  The
transpose is immaterial here because only the diagonal of the inverse
enters.  Order-wise exponents and the concentration-parameter
feasibility check cover the remaining calculable statements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .meanfield import SystemParams, equilibrium, f_tilde
from .tridiag import inverse_diagonal, jacobian

__all__ = [
    "BoundReport",
    "SscFeasibility",
    "ALPHA_VALID_MAX",
    "dominant_term",
    "upper_bound",
    "order_wise_exponent",
    "ssc_feasibility",
]

# The dominant-term theorem is stated for 0 < alpha < 1/18.
ALPHA_VALID_MAX = 1.0 / 18.0


@dataclass(frozen=True)
class BoundReport:
    """Dominant-term evaluation at one parameter point.

    ``dominant_term`` is the absolute mean-square-error scale, O(1/N);
    ``scaled_asymptotic`` = N * dominant_term and ``scaled_upper`` is
    exactly four times that.  ``alpha_valid`` records whether alpha lies
    in the theorem's range (0, 1/18).
    """

    dominant_term: float
    scaled_asymptotic: float
    scaled_upper: float
    lam: float
    buffer_used: int
    alpha_valid: bool


def dominant_term(params: SystemParams, tol: float = 1e-12) -> BoundReport:
    """Evaluate the dominant term of E||S - s*||^2 at ``params``."""
    eq = equilibrium(params, tol=tol)
    jac = jacobian(eq.s_star, params)
    inv_diag = inverse_diagonal(jac)
    ft = f_tilde(eq.s_star, params)
    scaled = -float(inv_diag @ ft)
    return BoundReport(
        dominant_term=scaled / params.n_servers,
        scaled_asymptotic=scaled,
        scaled_upper=4.0 * scaled,
        lam=params.lam,
        buffer_used=params.buffer,
        alpha_valid=0.0 < params.alpha < ALPHA_VALID_MAX,
    )


def upper_bound(params: SystemParams, tol: float = 1e-12) -> float:
    """Finite-N upper bound on E||S - s*||^2: four times the dominant term."""
    return 4.0 * dominant_term(params, tol=tol).dominant_term


def order_wise_exponent(alpha: float, xi: float) -> float:
    """Exponent e with E||S - s*||^2 <= N^{-e}.

    e = 1 - 2 alpha - 4 xi for 0 < alpha < 1/12 and
    e = 1 - 4 alpha - 7 xi for 1/12 <= alpha < 1/4 (boundary goes to the
    second branch).
    """
    if not 0.0 < alpha < 0.25:
        raise ValueError(f"alpha must lie in (0, 1/4), got {alpha}")
    if xi <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi}")
    if alpha < 1.0 / 12.0:
        return 1.0 - 2.0 * alpha - 4.0 * xi
    return 1.0 - 4.0 * alpha - 7.0 * xi


@dataclass(frozen=True)
class SscFeasibility:
    """Smallest admissible moment order r and its epsilon window."""

    r_min: int
    epsilon_interval: tuple[float, float]
    feasible: bool


def ssc_feasibility(alpha: float, xi: float) -> SscFeasibility:
    """Feasibility of the concentration parameters (r, epsilon).

    Requires r > 3 (1 + alpha + xi) / (1 - 18 alpha - 27 xi) together with

        2 r (1 + 3 alpha + 3 xi) / 3 < epsilon < r (1 - 4 alpha - 7 xi) - 1 - alpha - xi,

    and the epsilon window is nonempty exactly when r clears the first
    inequality.  Returns the smallest such integer r and its window.
    """
    if xi <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi}")
    denom = 1.0 - 18.0 * alpha - 27.0 * xi
    if not 0.0 < alpha or denom <= 0.0:
        raise ValueError(
            f"need 0 < alpha < 1/18 (and small xi): 1 - 18 alpha - 27 xi = {denom}"
        )
    r_bound = 3.0 * (1.0 + alpha + xi) / denom
    r_min = math.floor(r_bound) + 1  # strict inequality
    lo = 2.0 * r_min * (1.0 + 3.0 * alpha + 3.0 * xi) / 3.0
    hi = r_min * (1.0 - 4.0 * alpha - 7.0 * xi) - 1.0 - alpha - xi
    return SscFeasibility(r_min=r_min, epsilon_interval=(lo, hi), feasible=lo < hi)
