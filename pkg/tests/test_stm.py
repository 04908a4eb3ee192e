import math

import numpy as np
import pytest

from haptic_cone.stm import (CircleStimulus, FocusSchedule, focus_at_time,
                             focus_index_at_time, sample_circle)


def default_stim(radius=30.0):
    return CircleStimulus(center=(0.0, 0.0), plane_z=300.0, radius=radius)


def test_sample_frequency_is_product():
    stim = default_stim()
    assert stim.sample_freq == 100.0
    assert CircleStimulus(center=(0, 0), plane_z=1.0, radius=1.0,
                          n_points=8, render_freq=5.0).sample_freq == 40.0


def test_first_point_on_positive_x_axis():
    schedule = sample_circle(default_stim())
    assert np.array_equal(schedule.points[0], [30.0, 0.0, 300.0])


def test_opposite_point_at_half_turn():
    schedule = sample_circle(default_stim())
    assert schedule.points[5] == pytest.approx([-30.0, 0.0, 300.0], abs=1e-12)


def test_dwell_and_period_for_default_parameters():
    schedule = sample_circle(default_stim())
    assert schedule.dwell == pytest.approx(0.010, abs=1e-15)
    assert schedule.period == pytest.approx(0.100, abs=1e-15)
    assert schedule.n_points == 10


def test_points_lie_exactly_on_circle():
    stim = CircleStimulus(center=(12.0, -7.0), plane_z=410.0, radius=23.5)
    schedule = sample_circle(stim)
    d = np.hypot(schedule.points[:, 0] - 12.0, schedule.points[:, 1] + 7.0)
    assert np.allclose(d, 23.5, rtol=1e-9, atol=0.0)
    assert np.all(schedule.points[:, 2] == 410.0)


def test_counter_clockwise_monotone_angles():
    schedule = sample_circle(default_stim())
    angles = np.unwrap(np.arctan2(schedule.points[:, 1], schedule.points[:, 0]))
    assert np.all(np.diff(angles) > 0.0)


def test_adjacent_spacing_formula():
    stim = default_stim(radius=17.0)
    schedule = sample_circle(stim)
    expected = 2.0 * 17.0 * math.sin(math.pi / 10)
    pts = schedule.points
    for i in range(10):
        gap = np.linalg.norm(pts[(i + 1) % 10, :2] - pts[i, :2])
        assert gap == pytest.approx(expected, rel=1e-9)


def test_small_circle_fits_on_centered_palm():
    # At the clamp floor the spacing stays far below the palm radius, so a
    # centred palm always receives every point.
    schedule = sample_circle(default_stim(radius=5.0))
    spacing = 2.0 * 5.0 * math.sin(math.pi / 10)
    assert spacing < 40.0
    assert np.all(np.hypot(schedule.points[:, 0], schedule.points[:, 1]) <= 40.0)


def test_focus_at_time_start_and_midpoints():
    schedule = sample_circle(default_stim())
    assert np.array_equal(focus_at_time(schedule, 0.0), schedule.points[0])
    assert np.array_equal(focus_at_time(schedule, 0.035), schedule.points[3])


def test_focus_at_time_wraps_after_one_second():
    # floor(1.0 / 0.01) = 100 dwells -> index 100 mod 10 = 0.
    schedule = sample_circle(default_stim())
    assert np.array_equal(focus_at_time(schedule, 1.0), schedule.points[0])


def test_period_property_random_times():
    schedule = sample_circle(default_stim())
    rng = np.random.default_rng(7)
    period = schedule.period
    for t in rng.uniform(0.0, 2.0, size=300):
        # keep clear of dwell boundaries, where float rounding may flip a bin
        frac = (t / schedule.dwell) % 1.0
        if min(frac, 1.0 - frac) < 1e-6:
            continue
        assert focus_index_at_time(schedule, t) == focus_index_at_time(schedule, t + period)


def test_negative_time_rejected():
    schedule = sample_circle(default_stim())
    with pytest.raises(ValueError):
        focus_at_time(schedule, -0.001)


@pytest.mark.parametrize("kwargs", [
    {"radius": 0.0},
    {"radius": -3.0},
    {"n_points": 2},
    {"render_freq": 0.0},
])
def test_invalid_stimulus_rejected(kwargs):
    base = {"center": (0.0, 0.0), "plane_z": 300.0, "radius": 30.0}
    base.update(kwargs)
    with pytest.raises(ValueError):
        CircleStimulus(**base)


def test_schedule_points_read_only():
    schedule = sample_circle(default_stim())
    with pytest.raises(ValueError):
        schedule.points[0, 0] = 1.0
