"""Oracle tests for tumbling-trajectory metrics (period segmentation,
per-period descriptors, phase-space orbit, solver-to-solver comparison)."""

import numpy as np
import pytest

from slenderflow.errors import ConvergenceError
from slenderflow.harness.metrics import (
    PeriodMetrics,
    TumblingMetrics,
    compare_tumbling,
    tumbling_metrics,
)


def synthetic_pair(periods=3.5, period=2.0, dt=0.01, sep0=1.5e-4,
                   amp=4e-5, settling=3e-4, wobble=0.0):
    """Two bodies whose lateral separation oscillates sinusoidally while the
    pair settles at a constant rate.  Returns (t, positions, velocities) with
    positions/velocities shaped (n, 2, 3); gravity is -z, separation is x."""
    t = np.arange(0.0, periods * period, dt)
    phase = 2 * np.pi * t / period
    sep = sep0 + amp * np.sin(phase)
    usep = amp * (2 * np.pi / period) * np.cos(phase)
    z = -settling * t + wobble * np.sin(2 * phase)
    uz = -settling + wobble * (4 * np.pi / period) * np.cos(2 * phase)
    pos = np.zeros((t.size, 2, 3))
    vel = np.zeros((t.size, 2, 3))
    pos[:, 0, 0] = -sep / 2
    pos[:, 1, 0] = +sep / 2
    vel[:, 0, 0] = -usep / 2
    vel[:, 1, 0] = +usep / 2
    pos[:, :, 2] = z[:, None]
    vel[:, :, 2] = uz[:, None]
    return t, pos, vel


def test_synthetic_period_recovery():
    # [DERIVED] x(t) = A sin(2 pi t / T) must yield T* within one sample
    # interval of T
    period, dt = 2.0, 0.01
    t, pos, vel = synthetic_pair(period=period, dt=dt)
    m = tumbling_metrics(t, pos, vel)
    assert len(m.periods) >= 2
    for p in m.periods:
        assert p.period == pytest.approx(period, abs=dt)


def test_period_boundaries_at_maximal_separation():
    # boundaries sit where the separation velocity crosses + -> -, i.e. at
    # maximal separation (gravity-aligned configuration)
    period = 2.0
    t, pos, vel = synthetic_pair(period=period, dt=0.005)
    m = tumbling_metrics(t, pos, vel)
    # analytic maxima of sin at T/4 + k T
    for k, b in enumerate(m.boundaries):
        assert b == pytest.approx(period / 4 + k * period, abs=0.005)


def test_boundaries_partition_without_gaps_or_overlaps():
    t, pos, vel = synthetic_pair(periods=4.3, dt=0.007)
    m = tumbling_metrics(t, pos, vel)
    b = m.boundaries
    assert np.all(np.diff(b) > 0)
    for k, p in enumerate(m.periods):
        assert p.t_start == b[k]
        assert p.t_end == b[k + 1]
    assert len(m.periods) == len(b) - 1


def test_fall_distance_and_settling_speed():
    # [DERIVED] constant settling U with sinusoidal tumbling: D* = U T*,
    # U* = D*/T* = U for every complete period
    period, settling = 2.0, 3e-4
    t, pos, vel = synthetic_pair(period=period, settling=settling, dt=0.002)
    m = tumbling_metrics(t, pos, vel)
    for p in m.periods:
        assert p.fall_distance == pytest.approx(settling * period, rel=1e-3)
        assert p.settling_speed == pytest.approx(settling, rel=1e-3)


def test_lateral_velocity_extremes():
    # [DERIVED] each body's lateral speed peaks at (pi A / T) for the
    # synthetic orbit; extremes are taken over both bodies
    period, amp = 2.0, 4e-5
    t, pos, vel = synthetic_pair(period=period, amp=amp, dt=0.001)
    m = tumbling_metrics(t, pos, vel)
    peak = np.pi * amp / period
    for p in m.periods:
        assert p.ux_max == pytest.approx(peak, rel=1e-3)
        assert p.ux_min == pytest.approx(-peak, rel=1e-3)


def test_vertical_velocity_extremes():
    period, settling, wobble = 2.0, 3e-4, 1e-5
    t, pos, vel = synthetic_pair(period=period, settling=settling,
                                 wobble=wobble, dt=0.001)
    m = tumbling_metrics(t, pos, vel)
    swing = wobble * 4 * np.pi / period
    for p in m.periods:
        assert p.uz_max == pytest.approx(-settling + swing, rel=1e-3)
        assert p.uz_min == pytest.approx(-settling - swing, rel=1e-3)


def test_separation_extremes_per_period():
    sep0, amp = 1.5e-4, 4e-5
    t, pos, vel = synthetic_pair(sep0=sep0, amp=amp, dt=0.001)
    m = tumbling_metrics(t, pos, vel)
    for p in m.periods:
        assert p.separation_max == pytest.approx(sep0 + amp, rel=1e-4)
        assert p.separation_min == pytest.approx(sep0 - amp, rel=1e-4)


def test_orbit_polyline_shape_and_content():
    # the phase-space orbit pairs lateral separation with its rate
    t, pos, vel = synthetic_pair(dt=0.01)
    m = tumbling_metrics(t, pos, vel)
    assert m.orbit.shape == (t.size, 2)
    sep = pos[:, 1, 0] - pos[:, 0, 0]
    usep = vel[:, 1, 0] - vel[:, 0, 0]
    np.testing.assert_allclose(m.orbit[:, 0], sep, rtol=1e-12)
    np.testing.assert_allclose(m.orbit[:, 1], usep, rtol=1e-12)


def test_no_period_is_a_diagnostic_error():
    # monotone drift contains no tumbling period; the error must name the
    # longest monotone span so truncated runs are diagnosable
    n = 200
    t = np.linspace(0.0, 4.0, n)
    pos = np.zeros((n, 2, 3))
    vel = np.zeros((n, 2, 3))
    pos[:, 0, 0] = -1e-4 - 1e-5 * t
    pos[:, 1, 0] = +1e-4 + 1e-5 * t
    vel[:, 0, 0] = -1e-5
    vel[:, 1, 0] = +1e-5
    with pytest.raises(ConvergenceError, match="monotone"):
        tumbling_metrics(t, pos, vel)


def test_mean_over_periods():
    t, pos, vel = synthetic_pair(periods=3.4, dt=0.004)
    m = tumbling_metrics(t, pos, vel)
    vals = [p.settling_speed for p in m.periods]
    assert m.mean("settling_speed") == pytest.approx(np.mean(vals), rel=1e-12)


def test_input_validation():
    t, pos, vel = synthetic_pair()
    with pytest.raises(ValueError):
        tumbling_metrics(t[:-1], pos, vel)          # length mismatch
    with pytest.raises(ValueError):
        tumbling_metrics(t, pos[:, :1], vel[:, :1])  # needs two bodies


def test_compare_identical_reports_gives_zero_deltas():
    # [TRIVIAL] comparing a tumbling summary against itself -> all zeros
    t, pos, vel = synthetic_pair()
    m = tumbling_metrics(t, pos, vel)
    deltas = compare_tumbling(m, m)
    assert deltas
    for key, value in deltas.items():
        assert value == 0.0, key


def test_compare_sign_convention():
    # deltas are (a - b) / b: a 10% slower settling in `a` -> -0.10
    t, pos, vel = synthetic_pair(settling=2.7e-4)
    t2, pos2, vel2 = synthetic_pair(settling=3.0e-4)
    a = tumbling_metrics(t, pos, vel)
    b = tumbling_metrics(t2, pos2, vel2)
    deltas = compare_tumbling(a, b)
    assert deltas["settling_speed"] == pytest.approx(-0.10, abs=5e-3)
    assert deltas["period"] == pytest.approx(0.0, abs=5e-3)


def test_period_metrics_is_a_record():
    t, pos, vel = synthetic_pair()
    m = tumbling_metrics(t, pos, vel)
    assert isinstance(m, TumblingMetrics)
    assert all(isinstance(p, PeriodMetrics) for p in m.periods)
