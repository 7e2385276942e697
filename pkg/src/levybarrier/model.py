"""Levy model specification and Euler-scheme path simulation.

The simulated process is drift + Brownian motion + a finite list of
compound-Poisson jump components.  Per-step randomness is drawn from
per-path substreams keyed on (path index, stream kind, component index),
so a bundle is a pure function of (model, plan) regardless of how the
work is scheduled, and extending the horizon extends each path in place.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate

__all__ = [
    "FoldedNormal",
    "Weibull",
    "PointMass",
    "Exponential",
    "JumpComponent",
    "LevyModelSpec",
    "SimulationPlan",
    "PathBundle",
    "characteristic_exponent",
    "simulate_paths",
    "DEFAULT_STEP_BUDGET",
]

# Substream kinds.  Observation streams carry a level index so that
# observation ladders can reuse level 0 for the plan's own mask.
_STREAM_GAUSS = 0
_STREAM_JUMP_FLAG = 1
_STREAM_JUMP_MAG = 2
_STREAM_OBS = 3

DEFAULT_STEP_BUDGET = 2_000_000_000


def _substream(master_seed: int, path_index: int, kind: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(path_index, kind, index))
    return np.random.Generator(np.random.PCG64(ss))


def derived_seed(master_seed: int, label: str) -> int:
    """Deterministic 64-bit seed for an auxiliary simulation (e.g. a fresh path set)."""
    import hashlib

    digest = hashlib.blake2b(f"{label}:{master_seed}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _fourier_cf(pdf: Callable[[np.ndarray], np.ndarray], theta: float) -> complex:
    """Characteristic function of a nonnegative law by QAWF Fourier quadrature."""
    if theta == 0.0:
        return 1.0 + 0.0j
    w = abs(theta)
    re = integrate.quad(pdf, 0.0, np.inf, weight="cos", wvar=w, limlst=200)[0]
    im = integrate.quad(pdf, 0.0, np.inf, weight="sin", wvar=w, limlst=200)[0]
    if theta < 0.0:
        im = -im
    return complex(re, im)


@dataclass(frozen=True)
class FoldedNormal:
    """|N(mean, variance)| magnitudes."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance <= 0.0:
            raise ValueError("FoldedNormal variance must be > 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.abs(rng.normal(self.mean, math.sqrt(self.variance), n))

    def expected_value(self) -> float:
        mu, sig = self.mean, math.sqrt(self.variance)
        return sig * math.sqrt(2.0 / math.pi) * math.exp(-mu * mu / (2 * sig * sig)) + mu * math.erf(
            mu / (sig * math.sqrt(2.0))
        )

    def char_function(self, theta: float) -> complex:
        mu, sig = self.mean, math.sqrt(self.variance)
        norm = 1.0 / (sig * math.sqrt(2.0 * math.pi))

        def pdf(z):
            return norm * (np.exp(-((z - mu) ** 2) / (2 * sig * sig)) + np.exp(-((z + mu) ** 2) / (2 * sig * sig)))

        return _fourier_cf(pdf, theta)


@dataclass(frozen=True)
class Weibull:
    """Weibull magnitudes; shape >= 1 keeps an exponential moment finite."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape < 1.0:
            raise ValueError("Weibull shape must be >= 1 (heavier tails lose the exponential moment)")
        if self.scale <= 0.0:
            raise ValueError("Weibull scale must be > 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.scale * rng.weibull(self.shape, n)

    def expected_value(self) -> float:
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def char_function(self, theta: float) -> complex:
        k, lam = self.shape, self.scale

        def pdf(z):
            u = np.asarray(z, dtype=float) / lam
            return (k / lam) * u ** (k - 1.0) * np.exp(-(u**k))

        return _fourier_cf(pdf, theta)


@dataclass(frozen=True)
class PointMass:
    """Deterministic magnitude a > 0."""

    a: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("PointMass magnitude must be > 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.a)

    def expected_value(self) -> float:
        return self.a

    def char_function(self, theta: float) -> complex:
        return complex(math.cos(theta * self.a), math.sin(theta * self.a))


@dataclass(frozen=True)
class Exponential:
    """Exponential magnitudes with the given mean."""

    mean: float

    def __post_init__(self):
        if self.mean <= 0.0:
            raise ValueError("Exponential mean must be > 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(self.mean, n)

    def expected_value(self) -> float:
        return self.mean

    def char_function(self, theta: float) -> complex:
        return 1.0 / (1.0 - 1j * theta * self.mean)


MagnitudeLaw = FoldedNormal | Weibull | PointMass | Exponential


@dataclass(frozen=True)
class JumpComponent:
    rate: float
    sign: int
    magnitude_law: MagnitudeLaw

    def __post_init__(self):
        if self.rate <= 0.0:
            raise ValueError("jump component rate must be > 0")
        if self.sign not in (-1, 1):
            raise ValueError("jump component sign must be +1 or -1")


@dataclass(frozen=True)
class LevyModelSpec:
    """Drift + Brownian + finite-activity jumps.

    `drift` is the total linear coefficient of the simulated path (there is
    no separate small-jump truncation compensation; see
    characteristic_exponent).
    """

    drift: float
    sigma: float
    jump_components: tuple[JumpComponent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "jump_components", tuple(self.jump_components))
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")
        if self.sigma == 0.0 and self.jump_components and self.drift == 0.0:
            raise ValueError("driftless compound Poisson process is excluded (needs sigma > 0 or drift != 0)")

    def mean_increment_rate(self) -> float:
        """E[X_1] of the continuous-time model: drift plus signed jump intensities."""
        return self.drift + sum(c.sign * c.rate * c.magnitude_law.expected_value() for c in self.jump_components)


def characteristic_exponent(model: LevyModelSpec, lam: float) -> complex:
    """Levy exponent with E[e^{i lam X_t}] = e^{-t Psi(lam)}.

    Finite-activity convention: Psi(lam) = -i*drift*lam + sigma^2 lam^2 / 2
    + sum_i rate_i * (1 - phi_i(lam)), with phi_i the characteristic
    function of the signed jump.  `drift` is the as-simulated linear
    coefficient, so no truncation compensation term appears.
    """
    psi = -1j * model.drift * lam + 0.5 * model.sigma**2 * lam**2
    for comp in model.jump_components:
        psi += comp.rate * (1.0 - comp.magnitude_law.char_function(comp.sign * lam))
    return complex(psi)


@dataclass(frozen=True)
class SimulationPlan:
    horizon_T: float
    steps_N: int
    paths_M: int
    discount_q: float
    obs_rate_eta: float
    master_seed: int

    def __post_init__(self):
        if self.horizon_T <= 0.0:
            raise ValueError("horizon_T must be > 0")
        if self.steps_N < 1:
            raise ValueError("steps_N must be >= 1")
        if self.paths_M < 1:
            raise ValueError("paths_M must be >= 1")
        if self.discount_q <= 0.0:
            raise ValueError("discount_q must be > 0")
        if self.obs_rate_eta <= 0.0:
            raise ValueError("obs_rate_eta must be > 0")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def dt(self) -> float:
        return self.horizon_T / self.steps_N


@dataclass(frozen=True, eq=False)
class PathBundle:
    """M simulated paths on the grid plus per-step observation flags.

    x_values has shape (M, N+1) with x_values[:, 0] == 0; obs_mask entry n
    flags a control opportunity at grid time n*dt (entry 0 is never
    flagged).  Arrays are frozen after construction and shareable.
    """

    plan: SimulationPlan
    x_values: np.ndarray
    obs_mask: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x_values, dtype=float)
        mask = np.asarray(self.obs_mask, dtype=bool)
        expected = (self.plan.paths_M, self.plan.steps_N + 1)
        if x.shape != expected or mask.shape != expected:
            raise ValueError(f"path arrays must have shape {expected}")
        if np.any(x[:, 0] != 0.0):
            raise ValueError("paths must start at 0 (x_values[:, 0] == 0)")
        if np.any(mask[:, 0]):
            raise ValueError("step 0 is not a control opportunity (obs_mask[:, 0] must be False)")
        x.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "x_values", x)
        object.__setattr__(self, "obs_mask", mask)

    def observed_running_min(self) -> np.ndarray:
        """Running minimum of each path over its observed steps (+inf before the first)."""
        arr = self._cache.get("observed_min")
        if arr is None:
            arr = np.minimum.accumulate(np.where(self.obs_mask, self.x_values, np.inf), axis=1)
            arr.flags.writeable = False
            self._cache["observed_min"] = arr
        return arr

    def running_min(self) -> np.ndarray:
        """Running minimum of each path over all grid steps (classical reflection)."""
        arr = self._cache.get("running_min")
        if arr is None:
            arr = np.minimum.accumulate(self.x_values, axis=1)
            arr.flags.writeable = False
            self._cache["running_min"] = arr
        return arr

    def reflected_at_zero(self, classical: bool = False) -> np.ndarray:
        """Paths controlled at barrier 0 from start 0: x + max(0 - running min, 0).

        Cached because every rho probe shares this array; only the shift by
        the probed barrier differs.
        """
        key = "reflected0_classical" if classical else "reflected0"
        arr = self._cache.get(key)
        if arr is None:
            m = self.running_min() if classical else self.observed_running_min()
            arr = self.x_values + np.maximum(0.0 - m, 0.0)
            arr.flags.writeable = False
            self._cache[key] = arr
        return arr

    def with_mask(self, obs_mask: np.ndarray, obs_rate_eta: float) -> "PathBundle":
        """Same paths under a different observation mask (shares x_values)."""
        return PathBundle(replace(self.plan, obs_rate_eta=obs_rate_eta), self.x_values, obs_mask)

    def dump_csv(self, x_path, mask_path=None) -> None:
        """Debug dump: one row per path, one column per grid time."""
        np.savetxt(x_path, self.x_values, delimiter=",")
        if mask_path is not None:
            np.savetxt(mask_path, self.obs_mask.astype(int), fmt="%d", delimiter=",")

    def dump_npz(self, path) -> None:
        np.savez_compressed(
            path,
            x_values=self.x_values,
            obs_mask=self.obs_mask,
            horizon_T=self.plan.horizon_T,
            steps_N=self.plan.steps_N,
            paths_M=self.plan.paths_M,
            discount_q=self.plan.discount_q,
            obs_rate_eta=self.plan.obs_rate_eta,
            master_seed=self.plan.master_seed,
        )


def step_observation_probability(rate: float, dt: float) -> float:
    """Per-step flag probability 1 - e^{-rate*dt} for a rate-`rate` Poisson stream."""
    return -math.expm1(-rate * dt)


def sample_observation_mask(plan: SimulationPlan, rate: float, level: int, out: np.ndarray, paths: range) -> None:
    """Fill per-step Bernoulli observation flags for the given paths.

    `level` selects the observation substream; level 0 is the stream used
    by simulate_paths for the plan's own rate, higher levels belong to
    observation ladders.
    """
    p = step_observation_probability(rate, plan.dt)
    n = plan.steps_N
    for m in paths:
        out[m, 0] = False
        out[m, 1:] = _substream(plan.master_seed, m, _STREAM_OBS, level).random(n) < p


def _fill_block(model: LevyModelSpec, plan: SimulationPlan, x: np.ndarray, mask: np.ndarray, lo: int, hi: int) -> None:
    n = plan.steps_N
    dt = plan.dt
    sig_sqdt = model.sigma * math.sqrt(dt)
    jump_p = [step_observation_probability(c.rate, dt) for c in model.jump_components]
    for m in range(lo, hi):
        incr = np.full(n, model.drift * dt)
        if model.sigma > 0.0:
            incr += sig_sqdt * _substream(plan.master_seed, m, _STREAM_GAUSS).standard_normal(n)
        for i, comp in enumerate(model.jump_components):
            flags = _substream(plan.master_seed, m, _STREAM_JUMP_FLAG, i).random(n) < jump_p[i]
            fired = int(flags.sum())
            if fired:
                mags = comp.magnitude_law.sample(_substream(plan.master_seed, m, _STREAM_JUMP_MAG, i), fired)
                incr[flags] += comp.sign * mags
        x[m, 0] = 0.0
        np.cumsum(incr, out=x[m, 1:])
    sample_observation_mask(plan, plan.obs_rate_eta, 0, mask, range(lo, hi))


def simulate_paths(
    model: LevyModelSpec,
    plan: SimulationPlan,
    *,
    max_total_steps: int = DEFAULT_STEP_BUDGET,
    threads: int = 1,
) -> PathBundle:
    """Euler scheme: X_{n+1} = X_n + drift*dt + sigma*sqrt(dt)*G + per-step jumps.

    Each jump component fires at most once per step, with probability
    1 - e^{-rate*dt}; the observation mask is an independent per-step
    Bernoulli(1 - e^{-eta*dt}) stream.  Output is bit-identical for a
    given (model, plan) under any thread count.
    """
    total = plan.steps_N * plan.paths_M
    if total > max_total_steps:
        raise ValueError(
            f"plan needs {total} path-steps, over the {max_total_steps} budget; "
            "raise max_total_steps explicitly if intended"
        )
    m_paths = plan.paths_M
    x = np.empty((m_paths, plan.steps_N + 1))
    mask = np.empty((m_paths, plan.steps_N + 1), dtype=bool)
    if threads <= 1 or m_paths < 2:
        _fill_block(model, plan, x, mask, 0, m_paths)
    else:
        block = max(1, -(-m_paths // threads))
        bounds = [(lo, min(lo + block, m_paths)) for lo in range(0, m_paths, block)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: _fill_block(model, plan, x, mask, *b), bounds))
    return PathBundle(plan, x, mask)
