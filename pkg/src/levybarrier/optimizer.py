"""Optimal-barrier search and the observation-rate convergence study.

b* = inf{b : rho(b) + C >= 0}.  Every bisection probe reuses the same
bundle, so the probed function inherits the estimator's pathwise
monotonicity in b and the search is deterministic given the bundle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .costs import CostSpec
from .estimator import Estimate, estimate_rho, estimate_rho_classical, estimate_value_multi, estimate_classical_value_multi
from .model import LevyModelSpec, PathBundle, SimulationPlan, simulate_paths
from .observation import build_ladder

__all__ = [
    "BarrierSearchResult",
    "BracketExpansionError",
    "find_optimal_barrier",
    "ConvergenceRow",
    "ConvergenceTable",
    "convergence_study",
]

DEFAULT_TOLERANCE = 1e-3
DEFAULT_BRACKET = (-1.0, 1.0)
MAX_BISECTION_ITERATIONS = 60
MAX_BRACKET_DOUBLINGS = 60


class BracketExpansionError(RuntimeError):
    """No sign change found: some side of the slope condition is violated."""


@dataclass(frozen=True)
class BarrierSearchResult:
    b_star: float
    bracket_lo: float
    bracket_hi: float
    iterations: int
    rho_at_lo: Estimate
    rho_at_hi: Estimate
    tolerance: float


def find_optimal_barrier(
    bundle: PathBundle,
    cost: CostSpec,
    tol: float = DEFAULT_TOLERANCE,
    *,
    classical: bool = False,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    max_doublings: int = MAX_BRACKET_DOUBLINGS,
    max_iterations: int = MAX_BISECTION_ITERATIONS,
    threads: int = 1,
) -> BarrierSearchResult:
    """Bisection root of rho(b) + C on CRN estimates.

    The bracket is doubled outward from `bracket` until
    rho(lo) + C < 0 <= rho(hi) + C, then bisected with >=0 acceptance
    (the leftmost sign change, matching the inf in the definition of b*),
    stopping once the bracket is narrower than tol.  b* is the final
    midpoint.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    failure = cost.slope_condition_failure(bundle.plan.discount_q)
    if failure is not None:
        raise BracketExpansionError(failure)

    probe = estimate_rho_classical if classical else estimate_rho
    shift = cost.unit_cost_C

    def g(b: float) -> Estimate:
        return probe(bundle, cost, b, threads=threads)

    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    est_lo, est_hi = g(lo), g(hi)

    span = hi - lo
    doublings = 0
    while est_lo.mean + shift >= 0.0:
        if doublings >= max_doublings:
            raise BracketExpansionError(
                f"rho({lo:g}) + C still >= 0 after {doublings} doublings; "
                "left slope condition f'_+(-inf) < -C*q appears violated for this cost"
            )
        hi, est_hi = lo, est_lo
        lo -= span
        span *= 2.0
        est_lo = g(lo)
        doublings += 1
    doublings = 0
    while est_hi.mean + shift < 0.0:
        if doublings >= max_doublings:
            raise BracketExpansionError(
                f"rho({hi:g}) + C still < 0 after {doublings} doublings; "
                "right slope condition f'_+(inf) > -C*q appears violated for this cost"
            )
        lo, est_lo = hi, est_hi
        hi += span
        span *= 2.0
        est_hi = g(hi)
        doublings += 1

    iterations = 0
    while hi - lo > tol and iterations < max_iterations:
        mid = 0.5 * (lo + hi)
        est_mid = g(mid)
        if est_mid.mean + shift >= 0.0:
            hi, est_hi = mid, est_mid
        else:
            lo, est_lo = mid, est_mid
        iterations += 1

    return BarrierSearchResult(
        b_star=0.5 * (lo + hi),
        bracket_lo=lo,
        bracket_hi=hi,
        iterations=iterations,
        rho_at_lo=est_lo,
        rho_at_hi=est_hi,
        tolerance=tol,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    eta: float  # math.inf marks the classical (continuous-observation) row
    result: BarrierSearchResult
    values: tuple[Estimate, ...]

    @property
    def b_star(self) -> float:
        return self.result.b_star


@dataclass(frozen=True)
class ConvergenceTable:
    x_grid: tuple[float, ...]
    rows: tuple[ConvergenceRow, ...]

    @property
    def classical(self) -> ConvergenceRow:
        return self.rows[-1]

    def eta_rows(self) -> tuple[ConvergenceRow, ...]:
        return self.rows[:-1]


def convergence_study(
    model: LevyModelSpec,
    plan: SimulationPlan,
    cost: CostSpec,
    rates,
    *,
    x_grid=(),
    tol: float = DEFAULT_TOLERANCE,
    threads: int = 1,
    bundle: PathBundle | None = None,
) -> ConvergenceTable:
    """Optimal barriers and value curves across an observation-rate ladder.

    One path set and one nested mask ladder serve every rate, so the
    barrier column is monotone under the same coupling that proves the
    eta -> infinity convergence; the classical row uses continuous
    reflection on the same paths.
    """
    rates = [float(r) for r in rates]
    if bundle is None:
        bundle = simulate_paths(model, plan, threads=threads)
    ladder = build_ladder(rates, plan)
    x_grid = tuple(float(v) for v in x_grid)

    rows = []
    for level, eta in enumerate(rates):
        level_bundle = ladder.bundle_for(bundle, level)
        result = find_optimal_barrier(level_bundle, cost, tol, threads=threads)
        values = ()
        if x_grid:
            values = tuple(estimate_value_multi(level_bundle, cost, result.b_star, x_grid, threads=threads))
        rows.append(ConvergenceRow(eta=eta, result=result, values=values))

    classical_result = find_optimal_barrier(bundle, cost, tol, classical=True, threads=threads)
    classical_values = ()
    if x_grid:
        classical_values = tuple(
            estimate_classical_value_multi(bundle, cost, classical_result.b_star, x_grid, threads=threads)
        )
    rows.append(ConvergenceRow(eta=math.inf, result=classical_result, values=classical_values))
    return ConvergenceTable(x_grid=x_grid, rows=tuple(rows))
