import numpy as np
import pytest

from haptic_cone.tracking import (HandSample, MarkerSet, SensorModel, Trajectory,
                                  centroid, observe, read_trajectory_jsonl,
                                  write_trajectory_jsonl)


def straight_line_trajectory(velocity_mm_s, duration=2.0, dt=0.001,
                             origin=(0.0, 0.0, 400.0)):
    traj = Trajectory()
    v = np.asarray(velocity_mm_s, dtype=float)
    o = np.asarray(origin, dtype=float)
    n = int(duration / dt)
    for i in range(n + 1):
        t = i * dt
        traj.append(t, o + v * t) if i else traj.append(0.0, o)
    return traj


def test_centroid_examples():
    m = MarkerSet(a=[0, 0, 0], b=[30, 0, 0], c=[0, 30, 0])
    assert np.allclose(centroid(m), [10.0, 10.0, 0.0])
    p = MarkerSet(a=[5, 6, 7], b=[5, 6, 7], c=[5, 6, 7])
    assert np.allclose(centroid(p), [5.0, 6.0, 7.0])
    q = MarkerSet(a=[1, 2, 3], b=[4, 5, 6], c=[7, 8, 9])
    assert np.allclose(centroid(q), [4.0, 5.0, 6.0])


def test_marker_degeneracy_flag():
    assert MarkerSet(a=[1, 2, 3], b=[4, 5, 6], c=[7, 8, 9]).degenerate
    assert not MarkerSet(a=[0, 0, 0], b=[30, 0, 0], c=[0, 30, 0]).degenerate


def test_trajectory_interpolation_and_clamping():
    traj = Trajectory()
    traj.append(0.0, [0.0, 0.0, 0.0])
    traj.append(1.0, [10.0, 0.0, 0.0])
    assert np.allclose(traj.position_at(0.5), [5.0, 0.0, 0.0])
    assert np.allclose(traj.position_at(-1.0), [0.0, 0.0, 0.0])
    assert np.allclose(traj.position_at(2.0), [10.0, 0.0, 0.0])


def test_trajectory_requires_increasing_time():
    traj = Trajectory()
    traj.append(0.0, [0, 0, 0])
    with pytest.raises(ValueError):
        traj.append(0.0, [1, 1, 1])


def test_stationary_hand_reported_exactly():
    traj = Trajectory()
    traj.append(0.0, [1.0, 2.0, 300.0])
    traj.append(5.0, [1.0, 2.0, 300.0])
    model = SensorModel()
    for t in (0.0, 0.01, 0.5, 3.0):
        assert np.allclose(observe(traj, t, model).position, [1.0, 2.0, 300.0])


def test_lag_at_0_3_m_s_is_27mm():
    traj = straight_line_trajectory([300.0, 0.0, 0.0])
    model = SensorModel()  # 30 fps, 90 ms
    t = 0.5  # frame aligned: 0.5 * 30 = 15
    sample = observe(traj, t, model)
    truth = traj.position_at(t)
    lag = np.linalg.norm(truth - sample.position)
    assert lag == pytest.approx(27.0, abs=1e-6)


def test_lag_at_0_45_m_s_reaches_palm_radius():
    traj = straight_line_trajectory([450.0, 0.0, 0.0])
    sample = observe(traj, 1.0, SensorModel())
    lag = np.linalg.norm(traj.position_at(1.0) - sample.position)
    assert lag == pytest.approx(40.5, abs=1e-6)


def test_startup_hold_before_latency_fills():
    traj = straight_line_trajectory([300.0, 0.0, 0.0])
    sample = observe(traj, 0.05, SensorModel())
    assert np.allclose(sample.position, traj.position_at(0.0))


def test_reports_change_only_at_frame_boundaries():
    traj = straight_line_trajectory([300.0, 0.0, 0.0])
    model = SensorModel()
    a = observe(traj, 0.501, model)
    b = observe(traj, 0.509, model)
    c = observe(traj, 0.534, model)
    assert np.array_equal(a.position, b.position)
    assert a.timestamp == b.timestamp
    assert not np.array_equal(a.position, c.position)


def test_ideal_sensor_reproduces_truth():
    traj = straight_line_trajectory([120.0, -40.0, 15.0])
    model = SensorModel(frame_rate=1e6, latency=0.0, noise_std=0.0)
    for t in (0.0, 0.25, 0.8, 1.5):
        assert np.allclose(observe(traj, t, model).position, traj.position_at(t),
                           atol=1e-6)


def test_noise_is_seed_and_frame_reproducible():
    traj = straight_line_trajectory([0.0, 0.0, 0.0])
    model = SensorModel(noise_std=2.0)
    a = observe(traj, 0.5, model, seed=11)
    b = observe(traj, 0.5, model, seed=11)
    c = observe(traj, 0.505, model, seed=11)   # same frame
    d = observe(traj, 0.5, model, seed=12)
    assert np.array_equal(a.position, b.position)
    assert np.array_equal(a.position, c.position)
    assert not np.array_equal(a.position, d.position)


def test_jsonl_roundtrip(tmp_path):
    samples = [HandSample(position=np.array([1.0, 2.0, 3.0]), timestamp=0.0),
               HandSample(position=np.array([4.0, 5.0, 6.0]), timestamp=0.5)]
    path = tmp_path / "traj.jsonl"
    n = write_trajectory_jsonl(samples, path, extra={"goal_id": 3})
    assert n == 2
    rows = read_trajectory_jsonl(path)
    assert rows[0]["goal_id"] == 3
    assert rows[1]["position"] == [4.0, 5.0, 6.0]
    assert rows[1]["t"] == 0.5
