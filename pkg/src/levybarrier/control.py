"""Barrier control maps applied to simulated paths.

Both maps reduce to a running minimum: the periodic-barrier control at
level b started from x keeps the controlled path at

    U_n = path_n + max(b - m_n, x),

where m_n is the running minimum of the path over *observed* steps
(all steps, including 0, for classical reflection).  The cumulative
control is R_n = max(b - m_n, x) - x.  Pushes happen strictly below b;
an observation landing exactly at b is left alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ControlledOutcome",
    "observed_running_min",
    "barrier_gap",
    "apply_periodic_barrier",
    "apply_classical_reflection",
    "first_control_step",
]


@dataclass(frozen=True, eq=False)
class ControlledOutcome:
    """One path under barrier control: U, cumulative R, and the control steps."""

    u_values: np.ndarray
    r_values: np.ndarray
    control_steps: tuple[int, ...]
    barrier: float
    start_x: float

    def __post_init__(self):
        self.u_values.flags.writeable = False
        self.r_values.flags.writeable = False


def observed_running_min(path: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Running minimum over observed entries along the last axis.

    +inf marks steps before the first observation.  mask=None observes
    every step including 0 (the classical-reflection convention).
    """
    path = np.asarray(path, dtype=float)
    if mask is None:
        return np.minimum.accumulate(path, axis=-1)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != path.shape:
        raise ValueError(f"mask shape {mask.shape} does not match path shape {path.shape}")
    return np.minimum.accumulate(np.where(mask, path, np.inf), axis=-1)


def barrier_gap(path: np.ndarray, mask: np.ndarray | None, b: float) -> np.ndarray:
    """b minus the observed running minimum (-inf before the first observation).

    The controlled path for any start x is path + max(gap, x); sharing
    this array across starts is what makes shift couplings exact.
    """
    return b - observed_running_min(path, mask)


def _outcome(path: np.ndarray, gap: np.ndarray, start_x: float, b: float) -> ControlledOutcome:
    level = np.maximum(gap, start_x)
    u = path + level
    r = level - start_x
    steps = np.flatnonzero(np.diff(r, prepend=0.0) > 0.0)
    return ControlledOutcome(u, r, tuple(int(s) for s in steps), float(b), float(start_x))


def apply_periodic_barrier(path, mask, start_x: float, b: float) -> ControlledOutcome:
    """Push the path up to b at every observed step where it sits strictly below b.

    R_n is the running maximum of (b - observed value)^+, so R only moves
    at observed steps and U lands exactly on b at each fresh push.
    """
    path = np.asarray(path, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if path.ndim != 1:
        raise ValueError("apply_periodic_barrier operates on a single path")
    if mask.shape != path.shape:
        raise ValueError("path and mask must have the same length")
    if mask[0]:
        raise ValueError("step 0 is not a control opportunity (mask[0] must be False)")
    return _outcome(path, barrier_gap(path, mask, b), float(start_x), float(b))


def apply_classical_reflection(path, start_x: float, b: float) -> ControlledOutcome:
    """Continuous reflection at b: R_n = (b - running minimum of start_x + path)^+.

    Unlike the periodic map this sees every grid step, including step 0,
    so a start below b is lifted immediately.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 1:
        raise ValueError("apply_classical_reflection operates on a single path")
    return _outcome(path, barrier_gap(path, None, b), float(start_x), float(b))


def first_control_step(outcome: ControlledOutcome) -> int | None:
    """Index of the first control, or None if the horizon saw no control."""
    return outcome.control_steps[0] if outcome.control_steps else None
