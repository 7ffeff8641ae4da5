"""Grids, reference trajectories, and window slicing."""

import math

import numpy as np
import pytest

from heol.errors import (
    CapabilityError,
    ConfigurationError,
    HorizonError,
    IntervalError,
    TimeOrderError,
    WarmUpError,
)
from heol.signals import (
    ReferenceTrajectory,
    SampledSeries,
    Segment,
    TimeGrid,
    Window,
    eval_trajectory,
    make_constant,
    make_smoothstep,
    window_slice,
)


# ---------------------------------------------------------------- TimeGrid


def test_grid_points_are_t0_plus_k_h_exactly():
    g = TimeGrid(t0=2.5, h=0.01, n_steps=15000)
    for k in (0, 1, 7, 14999, 15000):
        assert g.t(k) == 2.5 + k * 0.01  # one multiply, one add: no drift
    assert g.n_points == 15001
    times = g.times()
    assert times.shape == (15001,)
    assert times[0] == 2.5 and times[-1] == g.t(15000)


def test_grid_index_of_round_trips_and_rejects_off_grid():
    g = TimeGrid(t0=0.0, h=0.01, n_steps=100)
    for k in (0, 3, 100):
        assert g.index_of(g.t(k)) == k
    with pytest.raises(TimeOrderError):
        g.index_of(0.505)  # half a step off the grid


@pytest.mark.parametrize("bad", [dict(h=0.0), dict(h=-1.0), dict(n_steps=0)])
def test_grid_rejects_degenerate_construction(bad):
    kw = dict(t0=0.0, h=0.1, n_steps=10)
    kw.update(bad)
    with pytest.raises(ConfigurationError):
        TimeGrid(**kw)


# ------------------------------------------------------------ SampledSeries


def test_series_length_bounded_by_grid():
    g = TimeGrid(0.0, 0.1, 4)
    s = SampledSeries(g, np.arange(3.0))
    assert len(s) == 3
    with pytest.raises(ConfigurationError):
        SampledSeries(g, np.arange(6.0))


def test_series_rejects_non_finite_values():
    g = TimeGrid(0.0, 0.1, 4)
    with pytest.raises(ConfigurationError):
        SampledSeries(g, np.array([0.0, np.inf]))


# ------------------------------------------------------------- trajectories


def test_constant_trajectory_value_and_derivative():
    traj = make_constant(5.0)
    assert eval_trajectory(traj, 3.0, 0) == 5.0
    assert eval_trajectory(traj, 3.0, 1) == 0.0


def test_polynomial_segment_derivative():
    # y(t) = t^2 on [0, 10]: dy/dt at t=2 is 4
    traj = ReferenceTrajectory((Segment(0.0, 10.0, (0.0, 0.0, 1.0)),))
    assert traj.eval(2.0, 0) == 4.0
    assert traj.eval(2.0, 1) == 4.0
    assert traj.eval(2.0, 2) == 2.0
    assert traj.eval(2.0, 3) == 0.0


def test_trajectory_horizon_and_order_errors():
    traj = ReferenceTrajectory((Segment(0.0, 10.0, (1.0, 2.0)),))
    with pytest.raises(HorizonError):
        traj.eval(-0.5, 0)
    with pytest.raises(HorizonError):
        traj.eval(10.5, 0)
    with pytest.raises(CapabilityError):
        traj.eval(5.0, 4)
    with pytest.raises(CapabilityError):
        traj.eval(5.0, -1)


def test_trajectory_rejects_gaps_and_value_jumps():
    with pytest.raises(ConfigurationError):
        ReferenceTrajectory((Segment(0.0, 1.0, (0.0,)), Segment(2.0, 3.0, (0.0,))))
    with pytest.raises(ConfigurationError):
        # value jumps from 1 to 5 at the join
        ReferenceTrajectory((Segment(0.0, 1.0, (0.0, 1.0)), Segment(1.0, 2.0, (5.0,))))


def test_derivative_commutes_with_polynomial_differentiation(rng):
    # eval(., t, k+1) must equal the analytic derivative of the k-th table
    for _ in range(25):
        coeffs = rng.standard_normal(6)
        traj = ReferenceTrajectory((Segment(0.0, 2.0, tuple(coeffs)),), max_order=5)
        t = float(rng.uniform(0.0, 2.0))
        for k in range(5):
            dk = np.polynomial.polynomial.polyder(coeffs, k + 1)
            want = float(np.polynomial.polynomial.polyval(t, dk))
            got = traj.eval(t, k + 1)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


# --------------------------------------------------------------- smoothstep


def test_smoothstep_degenerates_to_constant():
    traj = make_smoothstep(1.0, 1.0, 0.0, 10.0)
    for t in (-5.0, 0.0, 3.7, 12.0):
        assert traj.eval(t, 0) == 1.0
        assert traj.eval(t, 1) == 0.0


def test_smoothstep_midpoint_symmetry():
    traj = make_smoothstep(0.0, 1.0, 0.0, 1.0)
    assert traj.eval(0.5, 0) == 0.5


def test_smoothstep_boundary_derivatives_vanish():
    traj = make_smoothstep(0.0, 1.0, 0.0, 1.0)
    for t in (0.0, 1.0):
        for order in (1, 2, 3):
            assert abs(traj.eval(t, order)) <= 1e-12


def test_smoothstep_plateaus_and_monotone_rise():
    traj = make_smoothstep(1.0, 2.0, 10.0, 40.0)
    assert traj.eval(0.0, 0) == 1.0
    assert traj.eval(150.0, 0) == 2.0
    samples = [traj.eval(t, 0) for t in np.linspace(10.0, 40.0, 301)]
    assert all(b >= a for a, b in zip(samples, samples[1:]))


def test_smoothstep_rejects_empty_interval():
    with pytest.raises(IntervalError):
        make_smoothstep(0.0, 1.0, 5.0, 5.0)
    with pytest.raises(IntervalError):
        make_smoothstep(0.0, 1.0, 5.0, 4.0)


# ------------------------------------------------------------ window slicing


def _series(n_steps=100, h=0.01):
    g = TimeGrid(0.0, h, n_steps)
    return SampledSeries(g, np.arange(n_steps + 1, dtype=float))


def test_window_slice_takes_most_recent_samples():
    s = _series()
    t_last = s.grid.t(100)
    w = window_slice(s, t_last, 2 * s.grid.h)
    assert len(w) == 3
    np.testing.assert_array_equal(w.values, [98.0, 99.0, 100.0])
    assert w.sigma[0] == 0.0
    assert w.sigma[-1] == w.T


def test_window_slice_warm_up_signals():
    s = _series()
    with pytest.raises(WarmUpError):
        window_slice(s, s.grid.t(1), 0.05)  # t - T before the origin
    short = SampledSeries(s.grid, np.arange(10.0))
    with pytest.raises(WarmUpError):
        window_slice(short, s.grid.t(50), 0.05)  # series not filled up to t


def test_window_slice_constant_series():
    g = TimeGrid(0.0, 0.1, 20)
    s = SampledSeries(g, np.full(21, 7.5))
    w = window_slice(s, g.t(20), 0.5)
    assert np.all(w.values == 7.5)
    assert w.sigma[0] == 0.0 and w.sigma[-1] == pytest.approx(0.5, abs=1e-12)


def test_window_slice_is_idempotent_bitwise():
    s = _series()
    a = window_slice(s, s.grid.t(80), 0.3)
    b = window_slice(s, s.grid.t(80), 0.3)
    assert a.T == b.T
    np.testing.assert_array_equal(a.sigma, b.sigma)
    np.testing.assert_array_equal(a.values, b.values)


def test_window_slice_rejects_non_multiple_length():
    s = _series()
    with pytest.raises(ConfigurationError):
        window_slice(s, s.grid.t(50), 0.015)


def test_window_validates_uniform_sigma():
    with pytest.raises(ConfigurationError):
        Window(T=1.0, sigma=np.array([0.0, 0.3, 1.0]), values=np.zeros(3))
    with pytest.raises(ConfigurationError):
        Window(T=1.0, sigma=np.array([0.1, 0.5, 1.0]), values=np.zeros(3))
    with pytest.raises(ConfigurationError):
        Window(T=1.0, sigma=np.array([0.0]), values=np.zeros(1))
