"""Monte Carlo engine for optimal periodic barrier control of Levy processes.

Simulates drift + Brownian + compound-Poisson paths observed at Poisson
times, applies periodic-barrier and classical reflection controls, and
finds the optimal barrier by common-random-number bisection on the
monotone functional rho(b) + C.
"""

from .control import (
    ControlledOutcome,
    apply_classical_reflection,
    apply_periodic_barrier,
    barrier_gap,
    first_control_step,
)
from .costs import CostSpec, builtin_cost
from .diagnostics import (
    CheckReport,
    check_coupling,
    check_M_operator,
    check_resolvent_fixed_point,
    check_slope_at_barrier,
)
from .estimator import (
    Estimate,
    discounted_time_integral,
    estimate_classical_value,
    estimate_rho,
    estimate_rho_classical,
    estimate_value,
    estimate_value_derivative,
    estimate_value_multi,
    rho_tail_bound,
)
from .model import (
    Exponential,
    FoldedNormal,
    JumpComponent,
    LevyModelSpec,
    PathBundle,
    PointMass,
    SimulationPlan,
    Weibull,
    characteristic_exponent,
    simulate_paths,
)
from .observation import ObservationLadder, build_ladder
from .optimizer import (
    BarrierSearchResult,
    BracketExpansionError,
    ConvergenceTable,
    convergence_study,
    find_optimal_barrier,
)

__all__ = [
    "ControlledOutcome",
    "apply_classical_reflection",
    "apply_periodic_barrier",
    "barrier_gap",
    "first_control_step",
    "CostSpec",
    "builtin_cost",
    "CheckReport",
    "check_coupling",
    "check_M_operator",
    "check_resolvent_fixed_point",
    "check_slope_at_barrier",
    "Estimate",
    "discounted_time_integral",
    "estimate_classical_value",
    "estimate_rho",
    "estimate_rho_classical",
    "estimate_value",
    "estimate_value_derivative",
    "estimate_value_multi",
    "rho_tail_bound",
    "Exponential",
    "FoldedNormal",
    "JumpComponent",
    "LevyModelSpec",
    "PathBundle",
    "PointMass",
    "SimulationPlan",
    "Weibull",
    "characteristic_exponent",
    "simulate_paths",
    "ObservationLadder",
    "build_ladder",
    "BarrierSearchResult",
    "BracketExpansionError",
    "ConvergenceTable",
    "convergence_study",
    "find_optimal_barrier",
]
