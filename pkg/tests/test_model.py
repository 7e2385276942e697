import math

import numpy as np
import pytest

import levybarrier as lb


def test_characteristic_exponent_pure_diffusion():
    model = lb.LevyModelSpec(drift=-0.1, sigma=0.2)
    psi = lb.characteristic_exponent(model, 1.0)
    assert psi == pytest.approx(0.02 + 0.1j, abs=1e-15)


def test_characteristic_exponent_zero_is_zero(bench_model):
    for model in (bench_model, lb.LevyModelSpec(0.3, 0.0), lb.LevyModelSpec(1.0, 0.5, (lb.JumpComponent(2.0, -1, lb.Exponential(0.7)),))):
        assert lb.characteristic_exponent(model, 0.0) == 0.0


def test_characteristic_exponent_closed_form_laws():
    # point mass and exponential have closed-form jump transforms
    model = lb.LevyModelSpec(
        drift=0.5,
        sigma=0.1,
        jump_components=(
            lb.JumpComponent(rate=2.0, sign=1, magnitude_law=lb.PointMass(1.5)),
            lb.JumpComponent(rate=3.0, sign=-1, magnitude_law=lb.Exponential(0.4)),
        ),
    )
    lam = 0.8
    expected = (
        -1j * 0.5 * lam
        + 0.5 * 0.01 * lam**2
        + 2.0 * (1.0 - np.exp(1j * lam * 1.5))
        + 3.0 * (1.0 - 1.0 / (1.0 - 1j * (-lam) * 0.4))
    )
    assert lb.characteristic_exponent(model, lam) == pytest.approx(expected, abs=1e-12)


@pytest.mark.slow
def test_characteristic_exponent_matches_simulated_cf(bench_model):
    lam = 0.5
    psi = lb.characteristic_exponent(bench_model, lam)
    plan = lb.SimulationPlan(
        horizon_T=1.0, steps_N=100, paths_M=100_000, discount_q=0.05, obs_rate_eta=1.0, master_seed=7
    )
    x1 = lb.simulate_paths(bench_model, plan, threads=2).x_values[:, -1]
    z = np.exp(1j * lam * x1)
    target = np.exp(-psi)
    se_re = z.real.std(ddof=1) / math.sqrt(z.size)
    se_im = z.imag.std(ddof=1) / math.sqrt(z.size)
    assert abs(z.real.mean() - target.real) <= 3 * se_re
    assert abs(z.imag.mean() - target.imag) <= 3 * se_im


def test_deterministic_drift_paths_are_linear():
    model = lb.LevyModelSpec(drift=-0.1, sigma=0.0)
    plan = lb.SimulationPlan(horizon_T=10.0, steps_N=1000, paths_M=3, discount_q=0.05, obs_rate_eta=1.0, master_seed=5)
    bundle = lb.simulate_paths(model, plan)
    n = np.arange(plan.steps_N + 1)
    expected = -0.1 * n * plan.dt
    np.testing.assert_allclose(bundle.x_values, np.broadcast_to(expected, bundle.x_values.shape), rtol=0, atol=1e-10)


@pytest.mark.slow
def test_terminal_mean_matches_closed_form(bench_model):
    plan = lb.SimulationPlan(
        horizon_T=100.0, steps_N=10_000, paths_M=5_000, discount_q=0.05, obs_rate_eta=1.0, master_seed=99
    )
    bundle = lb.simulate_paths(bench_model, plan, threads=2)
    x_T = bundle.x_values[:, -1]
    target = plan.horizon_T * (-0.1 + 0.4 * math.sqrt(2.0 / math.pi) - 0.6 * math.gamma(1.5))
    se = x_T.std(ddof=1) / math.sqrt(x_T.size)
    assert abs(x_T.mean() - target) <= 3 * se


def test_observation_mask_frequency(bench_model):
    plan = lb.SimulationPlan(
        horizon_T=10.0, steps_N=1000, paths_M=1000, discount_q=0.05, obs_rate_eta=1.0, master_seed=11
    )
    bundle = lb.simulate_paths(bench_model, plan)
    flags = bundle.obs_mask[:, 1:]
    p = -math.expm1(-plan.obs_rate_eta * plan.dt)
    se = math.sqrt(p * (1 - p) / flags.size)
    assert abs(flags.mean() - p) <= 3 * se
    assert not bundle.obs_mask[:, 0].any()


def test_simulation_is_deterministic_across_threads(bench_model, small_plan):
    a = lb.simulate_paths(bench_model, small_plan)
    b = lb.simulate_paths(bench_model, small_plan)
    c = lb.simulate_paths(bench_model, small_plan, threads=3)
    assert np.array_equal(a.x_values, b.x_values) and np.array_equal(a.obs_mask, b.obs_mask)
    assert np.array_equal(a.x_values, c.x_values) and np.array_equal(a.obs_mask, c.obs_mask)


def test_observation_stream_independent_of_eta(bench_model, small_plan):
    from dataclasses import replace

    other = replace(small_plan, obs_rate_eta=5.0)
    a = lb.simulate_paths(bench_model, small_plan)
    b = lb.simulate_paths(bench_model, other)
    assert np.array_equal(a.x_values, b.x_values)
    assert not np.array_equal(a.obs_mask, b.obs_mask)


def test_horizon_extension_is_pathwise(bench_model):
    short = lb.SimulationPlan(horizon_T=5.0, steps_N=500, paths_M=50, discount_q=0.05, obs_rate_eta=1.0, master_seed=3)
    long = lb.SimulationPlan(horizon_T=10.0, steps_N=1000, paths_M=50, discount_q=0.05, obs_rate_eta=1.0, master_seed=3)
    a = lb.simulate_paths(bench_model, short)
    b = lb.simulate_paths(bench_model, long)
    assert np.array_equal(a.x_values, b.x_values[:, : short.steps_N + 1])
    assert np.array_equal(a.obs_mask, b.obs_mask[:, : short.steps_N + 1])


def test_empirical_mean_rate_property(bench_model):
    assert bench_model.mean_increment_rate() == pytest.approx(
        -0.1 + 0.4 * math.sqrt(2.0 / math.pi) - 0.6 * math.gamma(1.5)
    )


def test_driftless_compound_poisson_rejected():
    with pytest.raises(ValueError, match="driftless"):
        lb.LevyModelSpec(drift=0.0, sigma=0.0, jump_components=(lb.JumpComponent(1.0, 1, lb.PointMass(1.0)),))


def test_magnitude_law_validation():
    with pytest.raises(ValueError):
        lb.Weibull(shape=0.5, scale=1.0)  # heavy tail: exponential moment lost
    with pytest.raises(ValueError):
        lb.PointMass(0.0)
    with pytest.raises(ValueError):
        lb.FoldedNormal(0.0, 0.0)
    with pytest.raises(ValueError):
        lb.JumpComponent(rate=-1.0, sign=1, magnitude_law=lb.PointMass(1.0))
    with pytest.raises(ValueError):
        lb.JumpComponent(rate=1.0, sign=2, magnitude_law=lb.PointMass(1.0))


def test_step_budget_guard(bench_model, small_plan):
    with pytest.raises(ValueError, match="budget"):
        lb.simulate_paths(bench_model, small_plan, max_total_steps=1000)


def test_bundle_arrays_are_immutable(small_bundle):
    with pytest.raises(ValueError):
        small_bundle.x_values[0, 0] = 1.0
    with pytest.raises(ValueError):
        small_bundle.obs_mask[0, 0] = True


def test_bundle_dump_roundtrip(tmp_path, small_bundle):
    npz = tmp_path / "bundle.npz"
    small_bundle.dump_npz(npz)
    data = np.load(npz)
    assert np.array_equal(data["x_values"], small_bundle.x_values)
    assert np.array_equal(data["obs_mask"], small_bundle.obs_mask)

    csv = tmp_path / "x.csv"
    small_bundle.dump_csv(csv)
    loaded = np.loadtxt(csv, delimiter=",")
    np.testing.assert_allclose(loaded, small_bundle.x_values, rtol=1e-12)
