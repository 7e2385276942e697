"""Running-cost specifications.

A cost is a convex function f with its right derivative and a unit
control cost C.  Builtins cover the three benchmark cases plus a linear
cost; custom costs must supply both callables vectorized over numpy
arrays (no numerical differentiation is ever performed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["CostSpec", "builtin_cost", "BUILTIN_TAGS"]

BUILTIN_TAGS = ("f1", "f2", "f3", "linear")

_VALIDATION_GRID = np.linspace(-40.0, 40.0, 321)


@dataclass(frozen=True)
class CostSpec:
    f: Callable[[np.ndarray], np.ndarray]
    f_prime_plus: Callable[[np.ndarray], np.ndarray]
    unit_cost_C: float
    kind: str = "custom"
    validation_grid: np.ndarray = field(default=_VALIDATION_GRID, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.f(self.validation_grid), dtype=float)
        slopes = np.asarray(self.f_prime_plus(self.validation_grid), dtype=float)
        if vals.shape != self.validation_grid.shape or slopes.shape != self.validation_grid.shape:
            raise ValueError("cost callables must be vectorized over numpy arrays")
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(slopes))):
            raise ValueError("cost callables must be finite on the validation grid")
        # Midpoint convexity on the uniform grid: f(x_{i+1}) <= (f(x_i) + f(x_{i+2}))/2.
        mid_excess = vals[1:-1] - 0.5 * (vals[:-2] + vals[2:])
        tol = 1e-9 * np.maximum(1.0, np.abs(vals[:-2]) + np.abs(vals[2:]))
        if np.any(mid_excess > tol):
            raise ValueError("running cost is not convex on the validation grid")
        if np.any(np.diff(slopes) < -1e-9 * np.maximum(1.0, np.abs(slopes[:-1]))):
            raise ValueError("f_prime_plus is not nondecreasing on the validation grid")

    def slope_condition_ok(self, q: float, bracket: float = 1e6) -> bool:
        """Check f'_+(-B) < -C*q < f'_+(B) on the given bracket B."""
        lo = float(self.f_prime_plus(np.array(-bracket)))
        hi = float(self.f_prime_plus(np.array(bracket)))
        return lo < -self.unit_cost_C * q < hi

    def slope_condition_failure(self, q: float, bracket: float = 1e6) -> str | None:
        """Human-readable description of the violated slope condition, or None."""
        lo = float(self.f_prime_plus(np.array(-bracket)))
        hi = float(self.f_prime_plus(np.array(bracket)))
        target = -self.unit_cost_C * q
        if not lo < target:
            return f"left slope condition violated: f'_+({-bracket:g}) = {lo:g} >= -C*q = {target:g}"
        if not target < hi:
            return f"right slope condition violated: f'_+({bracket:g}) = {hi:g} <= -C*q = {target:g}"
        return None


def _f1(x):
    x = np.asarray(x, dtype=float)
    return x * x


def _f1_prime(x):
    x = np.asarray(x, dtype=float)
    return 2.0 * x


def _f2(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0.0, x * x * x, x * x)


def _f2_prime(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0.0, 3.0 * x * x, 2.0 * x)


def _f3(x):
    x = np.asarray(x, dtype=float)
    # Clamp the exponential's argument to the x >= 1 branch so the unused
    # branch cannot overflow for very negative x.
    xp = np.maximum(x, 1.0)
    return np.where(x >= 1.0, xp * xp + np.exp(1.0 - xp), 0.5 * (x * x + 3.0))


def _f3_prime(x):
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 1.0)
    return np.where(x >= 1.0, 2.0 * xp - np.exp(1.0 - xp), x)


def _linear(x):
    x = np.asarray(x, dtype=float)
    return x + 0.0


def _linear_prime(x):
    x = np.asarray(x, dtype=float)
    return np.ones_like(x)


def builtin_cost(tag, unit_cost_C: float = 1.0) -> CostSpec:
    """Benchmark cost by tag: 'f1'|'f2'|'f3'|'linear' (cases also accepted as 1, 2, 3)."""
    if isinstance(tag, int):
        tag = f"f{tag}"
    tag = str(tag).lower()
    table = {
        "f1": (_f1, _f1_prime),
        "f2": (_f2, _f2_prime),
        "f3": (_f3, _f3_prime),
        "linear": (_linear, _linear_prime),
    }
    if tag not in table:
        raise ValueError(f"unknown builtin cost {tag!r}; expected one of {BUILTIN_TAGS}")
    f, fp = table[tag]
    return CostSpec(f=f, f_prime_plus=fp, unit_cost_C=float(unit_cost_C), kind=tag)
