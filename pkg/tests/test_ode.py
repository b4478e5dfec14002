"""Integrator unit tests: accuracy, dense output, stop handling, determinism."""
import math

import numpy as np
import pytest

from averbound import ode


def problem(rhs, y0, t_end, dim=None, t0=0.0):
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    return ode.IvpProblem(dimension=dim or y0.size, rhs=rhs, t0=t0, y0=y0,
                          t_end=t_end)


def test_constant_rhs_completes():
    traj = ode.integrate(problem(lambda t, y: np.zeros(1), [1.0], 1.0))
    assert traj.status is ode.Status.COMPLETED
    assert traj.times[0] == 0.0 and traj.times[-1] == 1.0
    assert np.all(traj.states == 1.0)


def test_exponential_endpoint_error():
    traj = ode.integrate(problem(lambda t, y: y, [1.0], 1.0), rtol=1e-9)
    assert traj.status is ode.Status.COMPLETED
    assert abs(traj.states[-1, 0] - math.e) < 1e-7


def test_linear_crossing_stop_time():
    traj = ode.integrate(problem(lambda t, y: np.ones(1), [0.0], 2.0),
                         stop=lambda t, y: y[0] >= 0.5)
    assert traj.status is ode.Status.STOPPED
    assert traj.stop_time == pytest.approx(0.5, abs=1e-9)
    assert traj.times[-1] == traj.stop_time


def test_sample_at_grid_time_is_exact():
    traj = ode.integrate(problem(lambda t, y: y, [1.0], 1.0))
    idx = len(traj.times) // 2
    assert np.array_equal(traj.sample(traj.times[idx]), traj.states[idx])


def test_sample_constant_everywhere():
    traj = ode.integrate(problem(lambda t, y: np.zeros(1), [3.5], 1.0))
    for t in (0.0, 0.1, 0.33, 0.999, 1.0):
        assert traj.sample(t)[0] == 3.5


def test_sample_exponential_midpoint():
    traj = ode.integrate(problem(lambda t, y: y, [1.0], 1.0), rtol=1e-9)
    assert traj.sample(0.5)[0] == pytest.approx(math.exp(0.5), abs=1e-6)


def test_sample_outside_span_raises():
    traj = ode.integrate(problem(lambda t, y: y, [1.0], 1.0))
    with pytest.raises(ValueError):
        traj.sample(-0.1)
    with pytest.raises(ValueError):
        traj.sample(1.1)


def test_convergence_with_tolerance():
    # Under error-per-step control an order >= 4 pair tracks the tolerance
    # nearly proportionally; a low-order method would flatten out.  Demand a
    # near-linear slope across six decades of tolerance.
    errs = []
    for rtol in (1e-5, 1e-7, 1e-9, 1e-11):
        traj = ode.integrate(problem(lambda t, y: y, [1.0], 1.0),
                             rtol=rtol, atol=rtol * 1e-3)
        errs.append(abs(traj.states[-1, 0] - math.e))
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    # overall slope >= 0.7 in log-log against the tolerance
    assert errs[0] / errs[-1] > 10.0 ** (6 * 0.7)


def test_determinism_bitwise():
    def rhs(t, y):
        return np.array([math.sin(t) * y[0], -y[1] + y[0] ** 2])
    a = ode.integrate(problem(rhs, [1.0, 0.5], 3.0))
    b = ode.integrate(problem(rhs, [1.0, 0.5], 3.0))
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.derivs, b.derivs)


def test_max_steps_exhaustion():
    traj = ode.integrate(problem(lambda t, y: y, [1.0], 10.0), max_steps=3)
    assert traj.status is ode.Status.STEP_FAILURE
    assert traj.times[-1] < 10.0


def test_blowup_gives_step_failure():
    # y' = y^2 blows up at t=1; the step size underflows before that.
    traj = ode.integrate(problem(lambda t, y: y * y, [1.0], 2.0))
    assert traj.status is ode.Status.STEP_FAILURE
    assert traj.times[-1] < 1.0 + 1e-6


def test_problem_validation():
    with pytest.raises(ValueError):
        ode.IvpProblem(1, lambda t, y: y, 0.0, np.zeros(1), -1.0)
    with pytest.raises(ValueError):
        ode.IvpProblem(2, lambda t, y: y, 0.0, np.zeros(3), 1.0)


def test_stop_true_at_start_rejected():
    with pytest.raises(ValueError):
        ode.integrate(problem(lambda t, y: y, [1.0], 1.0),
                      stop=lambda t, y: True)


def test_rhs_shape_mismatch_raises():
    with pytest.raises(ValueError):
        ode.integrate(problem(lambda t, y: np.zeros(3), [1.0], 1.0))


def test_first_step_is_honoured():
    traj = ode.integrate(problem(lambda t, y: np.zeros(1), [1.0], 1.0),
                         first_step=0.25)
    assert traj.times[1] == pytest.approx(0.25)


def test_cursor_sampler_matches_sample():
    def rhs(t, y):
        return np.array([math.cos(3 * t), -y[1]])
    traj = ode.integrate(problem(rhs, [0.0, 1.0], 5.0))
    samp = traj.sampler()
    rng = np.random.default_rng(42)
    ts = np.sort(rng.uniform(0.0, 5.0, 200))
    for t in ts:
        assert np.allclose(samp(t), traj.sample(t), atol=1e-12)
    # backwards queries move the cursor the other way
    for t in ts[::-1][:50]:
        assert np.allclose(samp(t), traj.sample(t), atol=1e-12)
    assert samp.value1(2.0) == pytest.approx(traj.sample(2.0)[0], abs=1e-12)
    out = np.empty(2)
    samp.into(2.0, out, 2)
    assert np.allclose(out, traj.sample(2.0), atol=1e-12)


def test_module_level_sample_alias():
    traj = ode.integrate(problem(lambda t, y: np.zeros(1), [2.0], 1.0))
    assert ode.sample(traj, 0.5)[0] == 2.0


def test_nonfinite_rhs_region_triggers_failure_not_crash():
    # sqrt goes complex for y > 2; the integrator should shrink and fail
    # cleanly rather than raise.
    def rhs(t, y):
        return np.array([math.sqrt(2.0 - y[0]) + 1.0])
    traj = ode.integrate(problem(rhs, [0.0], 10.0))
    assert traj.status is ode.Status.STEP_FAILURE
    assert np.all(np.isfinite(traj.states))
