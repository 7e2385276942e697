"""Discounted-functional Monte Carlo estimators over a path bundle.

Every estimator folds a per-path sample vector in a fixed chunked order,
so results are identical across thread counts, and all estimators taken
on the same bundle share its randomness (common random numbers).  The
time integral is the left-endpoint rule dt * sum_{n=0}^{N} e^{-q n dt} v_n,
both endpoints included.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .costs import CostSpec
from .model import PathBundle

__all__ = [
    "Estimate",
    "discount_weights",
    "discounted_time_integral",
    "estimate_rho",
    "estimate_rho_classical",
    "estimate_value",
    "estimate_value_multi",
    "estimate_classical_value",
    "estimate_classical_value_multi",
    "estimate_value_derivative",
    "rho_tail_bound",
]

CHUNK_PATHS = 512


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_paths: int

    @staticmethod
    def from_samples(samples: np.ndarray) -> "Estimate":
        """Sample mean and std error (sample std / sqrt(n)).

        A constant sample short-circuits to (value, 0): summation roundoff
        must not manufacture variance for deterministic integrands.
        """
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        if n == 0:
            raise ValueError("no samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("non-finite sample values")
        if n == 1 or np.ptp(samples) == 0.0:
            return Estimate(float(samples.flat[0]), 0.0, n)
        return Estimate(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n)), n)


def discount_weights(steps: int, dt: float, q: float) -> np.ndarray:
    """e^{-q n dt} for n = 0..steps."""
    return np.exp(-q * dt * np.arange(steps + 1))


def discounted_time_integral(values, dt: float, q: float) -> float:
    """dt * sum_n e^{-q n dt} values[n] over the whole grid, endpoints included."""
    if dt <= 0.0 or q <= 0.0:
        raise ValueError("dt and q must be > 0")
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite values")
    w = discount_weights(values.size - 1, dt, q)
    return float(dt * (w * values).sum())


def _chunk_bounds(n_paths: int, chunk: int = CHUNK_PATHS):
    return [(lo, min(lo + chunk, n_paths)) for lo in range(0, n_paths, chunk)]


def _run_chunks(worker, bounds, threads: int) -> None:
    if threads <= 1 or len(bounds) < 2:
        for b in bounds:
            worker(*b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: worker(*b), bounds))


def _running_min(bundle: PathBundle, classical: bool) -> np.ndarray:
    return bundle.running_min() if classical else bundle.observed_running_min()


def _owned(values) -> np.ndarray:
    """Float array safe for in-place scaling, whatever a custom cost returned."""
    arr = np.asarray(values, dtype=float)
    return arr if arr.flags.writeable else arr.copy()


def rho_samples(bundle: PathBundle, cost: CostSpec, b: float, *, classical: bool = False, threads: int = 1) -> np.ndarray:
    """Per-path dt * sum e^{-q n dt} f'_+(U0_n + b), U0 reflected at 0 from 0."""
    plan = bundle.plan
    u0 = bundle.reflected_at_zero(classical)
    w = discount_weights(plan.steps_N, plan.dt, plan.discount_q)
    out = np.empty(plan.paths_M)

    def work(lo, hi):
        g = _owned(cost.f_prime_plus(u0[lo:hi] + b))
        np.multiply(g, w, out=g)
        out[lo:hi] = plan.dt * g.sum(axis=1)

    _run_chunks(work, _chunk_bounds(plan.paths_M), threads)
    return out


def value_samples(
    bundle: PathBundle,
    cost: CostSpec,
    b: float,
    xs,
    *,
    classical: bool = False,
    threads: int = 1,
) -> np.ndarray:
    """Per-path discounted running cost plus C times the control jump sum.

    Returns shape (len(xs), M); every start shares the chunk's barrier gap,
    so estimates across starts are CRN-coupled.
    """
    plan = bundle.plan
    x = bundle.x_values
    m = _running_min(bundle, classical)
    w = discount_weights(plan.steps_N, plan.dt, plan.discount_q)
    starts = [float(s) for s in np.atleast_1d(xs)]
    out = np.empty((len(starts), plan.paths_M))

    def work(lo, hi):
        gap = b - m[lo:hi]
        for j, s in enumerate(starts):
            level = np.maximum(gap, s)
            r = level - s
            dr = np.diff(r, axis=1)
            np.multiply(dr, w[1:], out=dr)
            control = r[:, 0] + dr.sum(axis=1)
            level += x[lo:hi]  # level array becomes the controlled path U
            g = _owned(cost.f(level))
            np.multiply(g, w, out=g)
            out[j, lo:hi] = plan.dt * g.sum(axis=1) + cost.unit_cost_C * control

    _run_chunks(work, _chunk_bounds(plan.paths_M), threads)
    return out


def control_cost_samples(
    bundle: PathBundle,
    b: float,
    x: float,
    *,
    classical: bool = False,
    form: str = "jumps",
    threads: int = 1,
) -> np.ndarray:
    """Per-path discounted control cost sum.

    form="jumps" is the exact Stieltjes sum over increments of R;
    form="by_parts" is the summation-by-parts rearrangement
    e^{-qT} R_N + (1 - e^{-q dt}) sum_{n<N} e^{-q n dt} R_n, kept as an
    independent code path for consistency checks.
    """
    if form not in ("jumps", "by_parts"):
        raise ValueError("form must be 'jumps' or 'by_parts'")
    plan = bundle.plan
    m = _running_min(bundle, classical)
    w = discount_weights(plan.steps_N, plan.dt, plan.discount_q)
    out = np.empty(plan.paths_M)
    decay = -math.expm1(-plan.discount_q * plan.dt)

    def work(lo, hi):
        level = np.maximum(b - m[lo:hi], x)
        r = level - x
        if form == "jumps":
            out[lo:hi] = r[:, 0] + (np.diff(r, axis=1) * w[1:]).sum(axis=1)
        else:
            out[lo:hi] = w[-1] * r[:, -1] + decay * (r[:, :-1] * w[:-1]).sum(axis=1)

    _run_chunks(work, _chunk_bounds(plan.paths_M), threads)
    return out


def derivative_samples(bundle: PathBundle, cost: CostSpec, b: float, x: float, *, threads: int = 1) -> np.ndarray:
    """Per-path discounted f'_+ integral along the uncontrolled path up to the
    first control step (exclusive), minus C e^{-q T_b}.

    Paths never controlled within the horizon contribute the full-horizon
    integral and no terminal term.
    """
    plan = bundle.plan
    xv = bundle.x_values
    m = bundle.observed_running_min()
    n_steps = plan.steps_N
    w = discount_weights(n_steps, plan.dt, plan.discount_q)
    grid = np.arange(n_steps + 1)
    out = np.empty(plan.paths_M)

    def work(lo, hi):
        controlled = (b - m[lo:hi]) > x
        has = controlled.any(axis=1)
        idx = np.where(has, controlled.argmax(axis=1), n_steps + 1)
        alive = grid[None, :] < idx[:, None]
        g = _owned(cost.f_prime_plus(x + xv[lo:hi]))
        np.multiply(g, w, out=g)
        np.multiply(g, alive, out=g)
        integral = plan.dt * g.sum(axis=1)
        terminal = np.where(has, w[np.minimum(idx, n_steps)], 0.0)
        out[lo:hi] = integral - cost.unit_cost_C * terminal

    _run_chunks(work, _chunk_bounds(plan.paths_M), threads)
    return out


def estimate_rho(bundle: PathBundle, cost: CostSpec, b: float, *, threads: int = 1) -> Estimate:
    """Monte Carlo rho(b): expected discounted f'_+ along the barrier-b controlled
    process started at b, via the shift trick f'_+(U0 + b)."""
    return Estimate.from_samples(rho_samples(bundle, cost, b, threads=threads))


def estimate_rho_classical(bundle: PathBundle, cost: CostSpec, b: float, *, threads: int = 1) -> Estimate:
    """rho under continuous reflection instead of Poisson-observed pushes."""
    return Estimate.from_samples(rho_samples(bundle, cost, b, classical=True, threads=threads))


def estimate_value(bundle: PathBundle, cost: CostSpec, b: float, x: float, *, threads: int = 1) -> Estimate:
    """Expected total discounted cost of the periodic barrier-b strategy from x."""
    return Estimate.from_samples(value_samples(bundle, cost, b, [x], threads=threads)[0])


def estimate_value_multi(bundle: PathBundle, cost: CostSpec, b: float, xs, *, threads: int = 1) -> list[Estimate]:
    """estimate_value at several starts in one pass (CRN across starts)."""
    samples = value_samples(bundle, cost, b, xs, threads=threads)
    return [Estimate.from_samples(row) for row in samples]


def estimate_classical_value(bundle: PathBundle, cost: CostSpec, b: float, x: float, *, threads: int = 1) -> Estimate:
    """Expected total cost under continuous reflection at b from x.

    The control term includes the undiscounted time-0 jump (b - x)^+.
    """
    return Estimate.from_samples(value_samples(bundle, cost, b, [x], classical=True, threads=threads)[0])


def estimate_classical_value_multi(bundle: PathBundle, cost: CostSpec, b: float, xs, *, threads: int = 1) -> list[Estimate]:
    samples = value_samples(bundle, cost, b, xs, classical=True, threads=threads)
    return [Estimate.from_samples(row) for row in samples]


def estimate_value_derivative(bundle: PathBundle, cost: CostSpec, b: float, x: float, *, threads: int = 1) -> Estimate:
    """Monte Carlo v_b'(x) = E_x integral_0^{T_b} e^{-qt} f'_+(X_t) dt - C E_x e^{-q T_b}."""
    return Estimate.from_samples(derivative_samples(bundle, cost, b, x, threads=threads))


def rho_tail_bound(bundle: PathBundle, cost: CostSpec, b: float, *, classical: bool = False) -> float:
    """Bound on what any horizon extension can add to the rho estimate.

    Discrete tail mass dt e^{-q dt (N+1)} / (1 - e^{-q dt}) times the
    largest |f'_+| seen on the realized grid.  The sup is over visited
    values only, so this is a reported diagnostic, not a proof.
    """
    plan = bundle.plan
    u0 = bundle.reflected_at_zero(classical)
    sup = 0.0
    for lo, hi in _chunk_bounds(plan.paths_M):
        sup = max(sup, float(np.abs(cost.f_prime_plus(u0[lo:hi] + b)).max()))
    tail_mass = plan.dt * math.exp(-plan.discount_q * plan.dt * (plan.steps_N + 1)) / -math.expm1(
        -plan.discount_q * plan.dt
    )
    return sup * tail_mass
