import numpy as np
import pytest

import levybarrier as lb
from levybarrier.control import barrier_gap, observed_running_min


def _fuzz_case(rng, steps=10):
    path = np.concatenate([[0.0], rng.normal(0.0, 1.0, steps).cumsum()])
    mask = np.concatenate([[False], rng.random(steps) < 0.5])
    return path, mask


def test_hand_example_periodic():
    path = np.array([0.0, -1.0, 1.0, -2.0, 0.0])
    mask = np.array([False, True, False, True, True])
    out = lb.apply_periodic_barrier(path, mask, start_x=0.0, b=0.0)
    np.testing.assert_array_equal(out.r_values, [0.0, 1.0, 1.0, 2.0, 2.0])
    np.testing.assert_array_equal(out.u_values, [0.0, 0.0, 2.0, 0.0, 2.0])
    assert out.control_steps == (1, 3)
    assert lb.first_control_step(out) == 1


def test_hand_example_classical():
    path = np.array([0.0, -1.0, 1.0, -2.0, 0.0])
    out = lb.apply_classical_reflection(path, start_x=0.0, b=0.0)
    np.testing.assert_array_equal(out.r_values, [0.0, 1.0, 1.0, 2.0, 2.0])
    np.testing.assert_array_equal(out.u_values, [0.0, 0.0, 2.0, 0.0, 2.0])
    assert out.control_steps == (1, 3)


def test_barrier_never_binding():
    path = np.array([0.0, 1.0, -0.5, 2.0])
    mask = np.array([False, True, True, True])
    out = lb.apply_periodic_barrier(path, mask, start_x=1.0, b=0.4)
    assert np.all(out.r_values == 0.0)
    np.testing.assert_array_equal(out.u_values, 1.0 + path)
    assert lb.first_control_step(out) is None


def test_classical_barrier_never_binding():
    path = np.array([0.0, 1.0, -0.5, 2.0])
    out = lb.apply_classical_reflection(path, start_x=1.0, b=0.4)
    assert np.all(out.r_values == 0.0)
    np.testing.assert_array_equal(out.u_values, 1.0 + path)


def test_classical_time_zero_jump():
    path = np.array([0.0, 0.5, 1.0])
    out = lb.apply_classical_reflection(path, start_x=-2.0, b=0.0)
    assert out.r_values[0] == 2.0
    assert out.control_steps[0] == 0
    assert np.all(out.u_values >= 0.0)


def test_tie_at_barrier_is_not_controlled():
    path = np.array([0.0, -1.0, -1.0])
    mask = np.array([False, True, True])
    out = lb.apply_periodic_barrier(path, mask, start_x=0.0, b=-1.0)
    assert np.all(out.r_values == 0.0)
    assert out.control_steps == ()


def test_controlled_outcome_invariants_fuzz():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        path, mask = _fuzz_case(rng)
        start = float(rng.normal())
        b = float(rng.normal())
        out = lb.apply_periodic_barrier(path, mask, start, b)
        # U = start + X + R, R nondecreasing from 0, pushes land on b
        np.testing.assert_allclose(out.u_values, start + path + out.r_values, rtol=0, atol=1e-12)
        assert out.r_values[0] == 0.0
        assert np.all(np.diff(out.r_values) >= 0.0)
        before = start + path + np.concatenate([[0.0], out.r_values[:-1]])
        controlled = np.zeros_like(mask)
        controlled[list(out.control_steps)] = True
        assert np.all(mask[controlled])  # control only at observed steps
        np.testing.assert_allclose(out.u_values[controlled], b, rtol=0, atol=1e-12)
        observed = mask & (before < b)
        np.testing.assert_allclose(out.u_values[observed], b, rtol=0, atol=1e-12)
        observed_above = mask & (before >= b)
        assert not np.any(controlled & observed_above)


def test_periodic_dominated_by_classical_exactly():
    rng = np.random.default_rng(7)
    for _ in range(100):
        path, mask = _fuzz_case(rng)
        b = float(rng.normal())
        periodic = lb.apply_periodic_barrier(path, mask, 0.0, b)
        classical = lb.apply_classical_reflection(path, 0.0, b)
        assert np.all(periodic.r_values <= classical.r_values)
        assert np.all(periodic.u_values <= classical.u_values)


def test_monotone_in_barrier_and_start():
    rng = np.random.default_rng(11)
    for _ in range(100):
        path, mask = _fuzz_case(rng)
        lo = lb.apply_periodic_barrier(path, mask, 0.0, -0.3)
        hi = lb.apply_periodic_barrier(path, mask, 0.0, 0.4)
        assert np.all(lo.r_values <= hi.r_values)
        assert np.all(lo.u_values <= hi.u_values)
        a = lb.apply_periodic_barrier(path, mask, -0.2, 0.1)
        c = lb.apply_periodic_barrier(path, mask, 0.5, 0.1)
        assert np.all(a.u_values <= c.u_values)


def test_nested_mask_monotonicity():
    rng = np.random.default_rng(13)
    for _ in range(100):
        path, sparse = _fuzz_case(rng)
        dense = sparse | np.concatenate([[False], rng.random(path.size - 1) < 0.5])
        a = lb.apply_periodic_barrier(path, sparse, 0.0, 0.2)
        b = lb.apply_periodic_barrier(path, dense, 0.0, 0.2)
        assert np.all(a.r_values <= b.r_values)


def test_first_control_step_monotone_in_barrier():
    rng = np.random.default_rng(17)
    for _ in range(100):
        path, mask = _fuzz_case(rng)
        lo = lb.first_control_step(lb.apply_periodic_barrier(path, mask, 0.0, -0.5))
        hi = lb.first_control_step(lb.apply_periodic_barrier(path, mask, 0.0, 0.5))
        if lo is not None:
            assert hi is not None and hi <= lo


def test_shift_coupling_exact():
    # U^{[eps],b} - U^b stays in [0, eps] and never increases; both paths
    # share the barrier gap, making the comparison float-exact.
    rng = np.random.default_rng(19)
    for _ in range(200):
        path, mask = _fuzz_case(rng)
        b = float(rng.normal())
        eps = float(rng.uniform(0.0, 1.5))
        gap = barrier_gap(path, mask, b)
        diff = np.maximum(gap, eps) - np.maximum(gap, 0.0)
        assert np.all(diff >= 0.0) and np.all(diff <= eps)
        assert np.all(np.diff(diff) <= 0.0)
        base = lb.apply_periodic_barrier(path, mask, 0.0, b)
        shifted = lb.apply_periodic_barrier(path, mask, eps, b)
        # the outcomes decompose through the same gap array
        np.testing.assert_array_equal(base.u_values, path + np.maximum(gap, 0.0))
        np.testing.assert_array_equal(shifted.u_values, path + np.maximum(gap, eps))


def test_shifted_control_time_matches_lowered_barrier():
    rng = np.random.default_rng(23)
    for _ in range(200):
        path, mask = _fuzz_case(rng)
        b = float(rng.normal())
        eps = float(rng.uniform(0.05, 1.0))
        shifted = lb.first_control_step(lb.apply_periodic_barrier(path, mask, eps, b))
        lowered = lb.first_control_step(lb.apply_periodic_barrier(path, mask, 0.0, b - eps))
        assert shifted == lowered


def test_running_min_masked_semantics():
    path = np.array([0.0, -3.0, 1.0, -5.0])
    mask = np.array([False, False, True, False])
    m = observed_running_min(path, mask)
    assert m[0] == np.inf and m[1] == np.inf
    assert m[2] == 1.0 and m[3] == 1.0
    np.testing.assert_array_equal(observed_running_min(path), [0.0, -3.0, -3.0, -5.0])


def test_shape_validation():
    with pytest.raises(ValueError):
        lb.apply_periodic_barrier(np.zeros(3), np.array([False, True]), 0.0, 0.0)
    with pytest.raises(ValueError):
        lb.apply_periodic_barrier(np.zeros(3), np.array([True, False, False]), 0.0, 0.0)
    with pytest.raises(ValueError):
        lb.apply_periodic_barrier(np.zeros((2, 3)), np.zeros((2, 3), dtype=bool), 0.0, 0.0)
