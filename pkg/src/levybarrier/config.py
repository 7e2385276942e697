"""Config-file front end: flat INI sections mapped onto the domain types.

Every key is whitelisted; anything unrecognized is a ConfigError so a
typo cannot silently fall back to a default.  All defaults reproduce the
benchmark setup (drift -0.1, sigma 0.2, folded-normal up jumps at rate
0.4, Weibull(2, 1) down jumps at rate 0.6, q = 0.05, C = 1, T = 100,
N = 10000, M = 5000, eta = 1).
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .costs import CostSpec, builtin_cost
from .model import Exponential, FoldedNormal, JumpComponent, LevyModelSpec, PointMass, SimulationPlan, Weibull

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "DEFAULT_SEED"]

DEFAULT_SEED = 20240914
DEFAULT_ETAS = (2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0)


class ConfigError(ValueError):
    """Bad or unknown configuration input (CLI exit code 2)."""


_LAW_BUILDERS = {
    "folded_normal": (FoldedNormal, 2),
    "weibull": (Weibull, 2),
    "point_mass": (PointMass, 1),
    "exponential": (Exponential, 1),
}

_JUMP_RE = re.compile(r"([+-])\s*([0-9.eE+-]+?)\s*:\s*([a-z_]+)\(([^)]*)\)")


def parse_jumps(text: str) -> tuple[JumpComponent, ...]:
    """Parse '+0.4:folded_normal(0,1), -0.6:weibull(2,1)' style jump lists."""
    text = text.strip()
    if not text or text.lower() == "none":
        return ()
    components = []
    consumed = 0
    for match in _JUMP_RE.finditer(text):
        between = text[consumed : match.start()].strip().strip(",").strip()
        if between:
            raise ConfigError(f"could not parse jump list near {between!r}")
        sign = 1 if match.group(1) == "+" else -1
        try:
            rate = float(match.group(2))
        except ValueError as exc:
            raise ConfigError(f"bad jump rate {match.group(2)!r}") from exc
        law_name = match.group(3)
        if law_name not in _LAW_BUILDERS:
            raise ConfigError(f"unknown jump law {law_name!r}; expected one of {sorted(_LAW_BUILDERS)}")
        builder, arity = _LAW_BUILDERS[law_name]
        args_text = [a for a in (s.strip() for s in match.group(4).split(",")) if a]
        if len(args_text) != arity:
            raise ConfigError(f"jump law {law_name} takes {arity} parameter(s), got {len(args_text)}")
        try:
            args = [float(a) for a in args_text]
            components.append(JumpComponent(rate=rate, sign=sign, magnitude_law=builder(*args)))
        except ValueError as exc:
            raise ConfigError(f"bad jump component {match.group(0)!r}: {exc}") from exc
        consumed = match.end()
    tail = text[consumed:].strip().strip(",").strip()
    if tail:
        raise ConfigError(f"could not parse jump list near {tail!r}")
    if not components:
        raise ConfigError(f"could not parse jump list {text!r}")
    return tuple(components)


def default_model() -> LevyModelSpec:
    return LevyModelSpec(
        drift=-0.1,
        sigma=0.2,
        jump_components=(
            JumpComponent(rate=0.4, sign=1, magnitude_law=FoldedNormal(0.0, 1.0)),
            JumpComponent(rate=0.6, sign=-1, magnitude_law=Weibull(2.0, 1.0)),
        ),
    )


def default_plan() -> SimulationPlan:
    return SimulationPlan(
        horizon_T=100.0,
        steps_N=10_000,
        paths_M=5_000,
        discount_q=0.05,
        obs_rate_eta=1.0,
        master_seed=DEFAULT_SEED,
    )


@dataclass(frozen=True)
class ScenarioConfig:
    model: LevyModelSpec = field(default_factory=default_model)
    plan: SimulationPlan = field(default_factory=default_plan)
    cost_case: str = "f1"
    control_cost: float = 1.0
    # rho-curve command
    b_min: float = -3.0
    b_max: float = 1.0
    b_step: float = 0.25
    # value-curves command
    value_offsets: tuple[float, ...] = (-1.0, -0.5, 0.5, 1.0)
    x_half_width: float = 2.0
    x_points: int = 9
    # converge command
    etas: tuple[float, ...] = DEFAULT_ETAS
    # optimizer
    tol: float = 1e-3
    bracket_lo: float = -1.0
    bracket_hi: float = 1.0
    # verify command
    verify_x_offsets: tuple[float, ...] = (-1.0, -0.5, 0.0, 0.5, 1.0)
    verify_l_max: float = 1.5
    verify_l_step: float = 0.05
    verify_eps: tuple[float, ...] = (0.1, 1.0)
    verify_coupling_b: tuple[float, ...] = (-1.0, 0.0, 1.0)
    resolvent_x_offsets: tuple[float, ...] = (-1.0, 0.0, 1.0)
    # execution (excluded from the config digest)
    threads: int = 1

    def cost(self) -> CostSpec:
        return builtin_cost(self.cost_case, unit_cost_C=self.control_cost)

    def b_grid(self) -> np.ndarray:
        count = int(round((self.b_max - self.b_min) / self.b_step)) + 1
        return self.b_min + self.b_step * np.arange(count)

    def x_grid(self, center: float) -> np.ndarray:
        return center + np.linspace(-self.x_half_width, self.x_half_width, self.x_points)

    def digest(self) -> str:
        """Short hash of the experiment definition.

        Execution knobs (threads) are excluded so reruns with different
        parallelism produce byte-identical CSV headers.
        """
        model = self.model
        jumps = ",".join(
            f"{c.sign:+d}*{c.rate!r}:{type(c.magnitude_law).__name__}{tuple(vars(c.magnitude_law).values())!r}"
            for c in model.jump_components
        )
        plan = self.plan
        payload = "|".join(
            [
                f"drift={model.drift!r}",
                f"sigma={model.sigma!r}",
                f"jumps={jumps}",
                f"T={plan.horizon_T!r}",
                f"N={plan.steps_N}",
                f"M={plan.paths_M}",
                f"q={plan.discount_q!r}",
                f"eta={plan.obs_rate_eta!r}",
                f"seed={plan.master_seed}",
                f"cost={self.cost_case}",
                f"C={self.control_cost!r}",
                f"bgrid=({self.b_min!r},{self.b_max!r},{self.b_step!r})",
                f"offsets={self.value_offsets!r}",
                f"xgrid=({self.x_half_width!r},{self.x_points})",
                f"etas={self.etas!r}",
                f"tol={self.tol!r}",
                f"bracket=({self.bracket_lo!r},{self.bracket_hi!r})",
                f"verify=({self.verify_x_offsets!r},{self.verify_l_max!r},{self.verify_l_step!r},"
                f"{self.verify_eps!r},{self.verify_coupling_b!r},{self.resolvent_x_offsets!r})",
            ]
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


_SECTION_KEYS = {
    "model": {"drift", "sigma", "jumps"},
    "plan": {"horizon", "steps", "paths", "discount", "eta", "seed"},
    "cost": {"case", "control_cost"},
    "rho_curve": {"b_min", "b_max", "b_step"},
    "value_curves": {"offsets", "x_half_width", "x_points"},
    "converge": {"etas"},
    "optimizer": {"tol", "bracket_lo", "bracket_hi"},
    "verify": {"x_offsets", "l_max", "l_step", "eps", "coupling_b", "resolvent_x_offsets"},
    "run": {"threads"},
}


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from exc


def load_config(path=None, **overrides) -> ScenarioConfig:
    """Build a ScenarioConfig from an optional INI file plus keyword overrides.

    Recognized overrides mirror the CLI flags: case, seed, eta, paths,
    steps, horizon, tol, threads.
    """
    cfg = ScenarioConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(str(path))
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in _SECTION_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            unknown = set(parser[section]) - _SECTION_KEYS[section]
            if unknown:
                raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
        try:
            cfg = _apply_file(cfg, parser)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    try:
        cfg = _apply_overrides(cfg, overrides)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _apply_file(cfg: ScenarioConfig, parser: configparser.ConfigParser) -> ScenarioConfig:
    model = cfg.model
    if parser.has_section("model"):
        sec = parser["model"]
        model = LevyModelSpec(
            drift=sec.getfloat("drift", model.drift),
            sigma=sec.getfloat("sigma", model.sigma),
            jump_components=parse_jumps(sec["jumps"]) if "jumps" in sec else model.jump_components,
        )
    plan = cfg.plan
    if parser.has_section("plan"):
        sec = parser["plan"]
        plan = SimulationPlan(
            horizon_T=sec.getfloat("horizon", plan.horizon_T),
            steps_N=sec.getint("steps", plan.steps_N),
            paths_M=sec.getint("paths", plan.paths_M),
            discount_q=sec.getfloat("discount", plan.discount_q),
            obs_rate_eta=sec.getfloat("eta", plan.obs_rate_eta),
            master_seed=sec.getint("seed", plan.master_seed),
        )
    updates: dict = {"model": model, "plan": plan}
    if parser.has_section("cost"):
        sec = parser["cost"]
        updates["cost_case"] = sec.get("case", cfg.cost_case).lower()
        updates["control_cost"] = sec.getfloat("control_cost", cfg.control_cost)
    if parser.has_section("rho_curve"):
        sec = parser["rho_curve"]
        updates["b_min"] = sec.getfloat("b_min", cfg.b_min)
        updates["b_max"] = sec.getfloat("b_max", cfg.b_max)
        updates["b_step"] = sec.getfloat("b_step", cfg.b_step)
    if parser.has_section("value_curves"):
        sec = parser["value_curves"]
        if "offsets" in sec:
            updates["value_offsets"] = _floats(sec["offsets"])
        updates["x_half_width"] = sec.getfloat("x_half_width", cfg.x_half_width)
        updates["x_points"] = sec.getint("x_points", cfg.x_points)
    if parser.has_section("converge") and "etas" in parser["converge"]:
        updates["etas"] = _floats(parser["converge"]["etas"])
    if parser.has_section("optimizer"):
        sec = parser["optimizer"]
        updates["tol"] = sec.getfloat("tol", cfg.tol)
        updates["bracket_lo"] = sec.getfloat("bracket_lo", cfg.bracket_lo)
        updates["bracket_hi"] = sec.getfloat("bracket_hi", cfg.bracket_hi)
    if parser.has_section("verify"):
        sec = parser["verify"]
        if "x_offsets" in sec:
            updates["verify_x_offsets"] = _floats(sec["x_offsets"])
        updates["verify_l_max"] = sec.getfloat("l_max", cfg.verify_l_max)
        updates["verify_l_step"] = sec.getfloat("l_step", cfg.verify_l_step)
        if "eps" in sec:
            updates["verify_eps"] = _floats(sec["eps"])
        if "coupling_b" in sec:
            updates["verify_coupling_b"] = _floats(sec["coupling_b"])
        if "resolvent_x_offsets" in sec:
            updates["resolvent_x_offsets"] = _floats(sec["resolvent_x_offsets"])
    if parser.has_section("run"):
        updates["threads"] = parser["run"].getint("threads", cfg.threads)
    return replace(cfg, **updates)


def _apply_overrides(cfg: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    known = {"case", "seed", "eta", "paths", "steps", "horizon", "tol", "threads"}
    given = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(given) - known
    if unknown:
        raise ConfigError(f"unknown override(s): {sorted(unknown)}")
    plan_updates = {}
    if "seed" in given:
        plan_updates["master_seed"] = int(given["seed"])
    if "eta" in given:
        plan_updates["obs_rate_eta"] = float(given["eta"])
    if "paths" in given:
        plan_updates["paths_M"] = int(given["paths"])
    if "steps" in given:
        plan_updates["steps_N"] = int(given["steps"])
    if "horizon" in given:
        plan_updates["horizon_T"] = float(given["horizon"])
    updates: dict = {}
    if plan_updates:
        updates["plan"] = replace(cfg.plan, **plan_updates)
    if "case" in given:
        updates["cost_case"] = f"f{given['case']}" if str(given["case"]) in {"1", "2", "3"} else str(given["case"])
    if "tol" in given:
        updates["tol"] = float(given["tol"])
    if "threads" in given:
        updates["threads"] = int(given["threads"])
    return replace(cfg, **updates) if updates else cfg


def validate_scenario(cfg: ScenarioConfig) -> None:
    """Module-level invariants checked at load time; raises ConfigError."""
    try:
        cfg.cost()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.b_step <= 0.0 or cfg.b_max <= cfg.b_min:
        raise ConfigError("rho_curve grid needs b_min < b_max and b_step > 0")
    if cfg.x_points < 1 or cfg.x_half_width <= 0.0:
        raise ConfigError("value_curves grid needs x_points >= 1 and x_half_width > 0")
    if cfg.tol <= 0.0:
        raise ConfigError("optimizer tol must be > 0")
    if not cfg.bracket_lo < cfg.bracket_hi:
        raise ConfigError("optimizer bracket needs bracket_lo < bracket_hi")
    if not cfg.etas or cfg.etas[0] <= 0.0 or any(b <= a for a, b in zip(cfg.etas, cfg.etas[1:])):
        raise ConfigError("converge etas must be a nonempty, strictly increasing, positive list")
    if cfg.verify_l_step <= 0.0 or cfg.verify_l_max <= 0.0:
        raise ConfigError("verify l-grid needs l_step > 0 and l_max > 0")
    if any(e < 0.0 for e in cfg.verify_eps):
        raise ConfigError("verify eps values must be >= 0")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if math.isinf(cfg.plan.dt) or cfg.plan.dt <= 0.0:
        raise ConfigError("plan needs horizon > 0 and steps >= 1")
