"""Nested observation masks for a ladder of Poisson rates.

A ladder with rates eta_1 < ... < eta_K is built by superposing
independent per-step Bernoulli streams with the rate increments
lambda_k = eta_k - eta_{k-1}, so the level-k mask is the union of the
first k increment streams.  Flags only get added as the rate grows,
which is exactly the coupling used to compare optimal barriers across
observation rates pathwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PathBundle, SimulationPlan, sample_observation_mask

__all__ = ["ObservationLadder", "build_ladder"]


@dataclass(frozen=True, eq=False)
class ObservationLadder:
    """Masks for strictly increasing rates; mask(k) implies mask(k+1) entrywise."""

    plan: SimulationPlan
    rates: tuple[float, ...]
    masks: np.ndarray  # (K, M, N+1) bool

    def __post_init__(self):
        masks = np.asarray(self.masks, dtype=bool)
        masks.flags.writeable = False
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))

    def level_count(self) -> int:
        return len(self.rates)

    def bundle_for(self, bundle: PathBundle, level: int) -> PathBundle:
        """The given paths observed at this ladder level's rate."""
        return bundle.with_mask(self.masks[level], self.rates[level])


def build_ladder(rates, plan: SimulationPlan) -> ObservationLadder:
    """Sample nested masks for the given strictly increasing rates.

    Level 0 draws from the same substream simulate_paths uses for the
    plan's own mask, so a one-level ladder at rate == plan.obs_rate_eta
    reproduces the bundle's mask bit for bit.  Deterministic in
    (rates, plan).
    """
    rates = [float(r) for r in rates]
    if not rates:
        raise ValueError("rates must be nonempty")
    if rates[0] <= 0.0 or any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("rates must be strictly increasing and positive")

    m_paths, n_cols = plan.paths_M, plan.steps_N + 1
    masks = np.empty((len(rates), m_paths, n_cols), dtype=bool)
    increment = np.empty((m_paths, n_cols), dtype=bool)
    previous_rate = 0.0
    for level, rate in enumerate(rates):
        sample_observation_mask(plan, rate - previous_rate, level, increment, range(m_paths))
        if level == 0:
            masks[0] = increment
        else:
            np.logical_or(masks[level - 1], increment, out=masks[level])
        previous_rate = rate
    return ObservationLadder(plan, tuple(rates), masks)
