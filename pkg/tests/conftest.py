import math

import pytest

import levybarrier as lb
from levybarrier.config import default_model


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                rows.append((report.nodeid.split("::")[-1], label))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, label in sorted(rows):
            terminalreporter.write_line(f"{label}  {name}")


@pytest.fixture(scope="session")
def bench_model():
    return default_model()


@pytest.fixture(scope="session")
def small_plan():
    return lb.SimulationPlan(
        horizon_T=20.0, steps_N=2000, paths_M=400, discount_q=0.05, obs_rate_eta=1.0, master_seed=321321
    )


@pytest.fixture(scope="session")
def small_bundle(bench_model, small_plan):
    return lb.simulate_paths(bench_model, small_plan)


def lattice_model() -> lb.LevyModelSpec:
    # Unit down-drift plus a +2 point-mass jump firing with per-step
    # probability 1 - e^{-ln2} = 1/2 makes every increment exactly +-1.
    return lb.LevyModelSpec(
        drift=-1.0,
        sigma=0.0,
        jump_components=(lb.JumpComponent(rate=math.log(2.0), sign=1, magnitude_law=lb.PointMass(2.0)),),
    )


def lattice_plan(paths: int, seed: int = 424242) -> lb.SimulationPlan:
    return lb.SimulationPlan(
        horizon_T=4.0, steps_N=4, paths_M=paths, discount_q=0.05, obs_rate_eta=math.log(2.0), master_seed=seed
    )


@pytest.fixture(scope="session")
def lattice_bundle_small():
    return lb.simulate_paths(lattice_model(), lattice_plan(20_000))
