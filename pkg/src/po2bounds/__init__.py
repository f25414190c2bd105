"""Calculable mean-field error bounds for power-of-two-choices load balancing.

The package evaluates the dominant term and the finite-N upper bound on
the steady-state mean-square error E||S - s*||^2 of the heavy-traffic
mean-field approximation, and validates them against stochastic
simulation of the exact CTMC and against exact stationary solves at
small scale.
"""

from .bounds import (
    BoundReport,
    SscFeasibility,
    dominant_term,
    order_wise_exponent,
    ssc_feasibility,
    upper_bound,
)
from .exactchain import (
    GeneratorMatrix,
    LatticeStateSpace,
    StationaryDistribution,
    build_generator,
    exact_mse,
    stationary,
)
from .meanfield import (
    Equilibrium,
    LyapunovWeights,
    SystemParams,
    Trajectory,
    arrival_rate,
    check_lyapunov_decay,
    drift,
    equilibrium,
    f_tilde,
    in_state_space,
    integrate,
    lyapunov_weights,
    taylor_check,
)
from .simulator import (
    AggregateState,
    SimConfig,
    SimStats,
    TailConfig,
    run,
    step_gillespie,
    step_uniformized,
)
from .tridiag import (
    SpectrumReport,
    Tridiagonal,
    convergents,
    determinants,
    inverse_diagonal,
    inverse_entry,
    jacobian,
    solve,
    spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SystemParams",
    "Equilibrium",
    "LyapunovWeights",
    "Trajectory",
    "arrival_rate",
    "in_state_space",
    "drift",
    "f_tilde",
    "equilibrium",
    "integrate",
    "lyapunov_weights",
    "check_lyapunov_decay",
    "taylor_check",
    "Tridiagonal",
    "SpectrumReport",
    "jacobian",
    "determinants",
    "convergents",
    "inverse_diagonal",
    "solve",
    "inverse_entry",
    "spectrum",
    "BoundReport",
    "SscFeasibility",
    "dominant_term",
    "upper_bound",
    "order_wise_exponent",
    "ssc_feasibility",
    "AggregateState",
    "SimConfig",
    "TailConfig",
    "SimStats",
    "run",
    "step_uniformized",
    "step_gillespie",
    "LatticeStateSpace",
    "GeneratorMatrix",
    "StationaryDistribution",
    "build_generator",
    "stationary",
    "exact_mse",
]
