import numpy as np
import pytest

from hybridloc import (NoiseConfig, ReferencePath, RssRecord, ScheduleConfig,
                       TdoaRecord, assemble_epochs, predict_frame, sample_path,
                       synthesize_stream)
from hybridloc.measlog import log_text


def test_sample_straight_line():
    path = ReferencePath(waypoints=((0.0, 0.0), (10.0, 0.0)), speed=1.0)
    s = sample_path(path, 1.0)
    assert len(s.times) == 11
    assert np.allclose(s.positions[:, 0], np.arange(11), atol=1e-12)
    assert np.allclose(s.positions[:, 1], 0.0)
    assert np.allclose(s.velocities, [[1.0, 0.0]] * 11)


def test_sample_closed_square_returns_to_start():
    path = ReferencePath(waypoints=((0.0, 0.0), (4.0, 0.0), (4.0, 4.0),
                                    (0.0, 4.0), (0.0, 0.0)), speed=2.0)
    s = sample_path(path, 2.0)
    assert np.linalg.norm(s.positions[-1] - [0.0, 0.0]) < 1e-9


def test_sample_duration_matches_kinematics():
    path = ReferencePath(waypoints=((0.0, 0.0), (7.3, 0.0), (7.3, 2.1)), speed=1.3)
    rate = 3.0
    s = sample_path(path, rate)
    assert s.times[-1] <= path.duration + 1e-12
    assert path.duration - s.times[-1] < 1.0 / rate


def test_corner_velocity_switches_instantaneously():
    path = ReferencePath(waypoints=((0.0, 0.0), (2.0, 0.0), (2.0, 2.0)), speed=1.0)
    s = sample_path(path, 1.0)
    assert np.array_equal(s.velocities[1], [1.0, 0.0])  # still on first leg
    assert np.array_equal(s.velocities[2], [0.0, 1.0])  # corner sample: outgoing leg


def test_path_validation():
    with pytest.raises(ValueError):
        ReferencePath(waypoints=((0.0, 0.0),))
    with pytest.raises(ValueError):
        ReferencePath(waypoints=((0.0, 0.0), (0.0, 0.0)))
    with pytest.raises(ValueError):
        ReferencePath(waypoints=((0.0, 0.0), (1.0, 0.0)), speed=0.0)


def test_noiseless_innovations_zero(layout, params):
    path = ReferencePath(waypoints=((1.0, 1.0), (11.0, 5.0)), speed=1.0)
    sched = ScheduleConfig()
    truth = sample_path(path, sched.ble_rate)
    records = synthesize_stream(truth, layout, params, sched,
                                NoiseConfig(rss_sigma=0.0, toa_sigma=0.0, seed=0))
    frames = assemble_epochs(records, sched)
    assert len(frames) == len(truth.times)
    for frame, pos, vel in zip(frames, truth.positions, truth.velocities):
        state = np.array([pos[0], vel[0], pos[1], vel[1]])
        predicted = predict_frame(state, frame, layout, params).values
        assert np.max(np.abs(frame.values() - predicted)) == 0.0


def test_fixed_seed_reproducible(layout, params):
    path = ReferencePath(waypoints=((1.0, 1.0), (8.0, 4.0)), speed=1.0)
    sched = ScheduleConfig(uwb_rate=1.0)
    truth = sample_path(path, sched.ble_rate)
    noise = NoiseConfig(seed=1234)
    a = synthesize_stream(truth, layout, params, sched, noise)
    b = synthesize_stream(truth, layout, params, sched, noise)
    assert log_text(a) == log_text(b)
    c = synthesize_stream(truth, layout, params, sched, NoiseConfig(seed=1235))
    assert log_text(a) != log_text(c)


def test_stream_counts_and_order(layout, params):
    path = ReferencePath(waypoints=((1.0, 1.0), (9.0, 5.0)), speed=1.0)
    sched = ScheduleConfig(ble_rate=3.0, uwb_rate=1.0)
    truth = sample_path(path, sched.ble_rate)
    records = synthesize_stream(truth, layout, params, sched, NoiseConfig(seed=7))
    n_epochs = len(truth.times)
    n_uwb_epochs = len(sample_path(path, sched.uwb_rate).times)
    rss = [r for r in records if isinstance(r, RssRecord)]
    tdoa = [r for r in records if isinstance(r, TdoaRecord)]
    assert len(rss) == n_epochs * len(layout.ble_anchors)
    assert len(tdoa) == n_uwb_epochs * (len(layout.uwb_anchors) - 1)
    times = [r.timestamp for r in records]
    assert times == sorted(times)


def test_rss_residual_statistics(layout, params):
    # Sample-statistics oracle: the empirical residual std matches rss_sigma.
    path = ReferencePath(waypoints=((1.0, 1.0), (11.0, 5.0)), speed=0.02)
    sched = ScheduleConfig(uwb_rate=0.0)
    truth = sample_path(path, sched.ble_rate)
    sigma = 4.0
    records = synthesize_stream(truth, layout, params, sched,
                                NoiseConfig(rss_sigma=sigma, seed=42))
    clean = synthesize_stream(truth, layout, params, sched,
                              NoiseConfig(rss_sigma=0.0, seed=0))
    residuals = np.array([r.value - c.value for r, c in zip(records, clean)])
    assert len(residuals) >= 10_000
    assert abs(residuals.std() / sigma - 1.0) < 0.03


def test_tdoa_variance_doubles_toa(layout, params):
    path = ReferencePath(waypoints=((1.0, 1.0), (2.0, 1.0)), speed=1.0)
    sched = ScheduleConfig()
    truth = sample_path(path, sched.ble_rate)
    toa_sigma = 2e-9
    records = synthesize_stream(truth, layout, params, sched,
                                NoiseConfig(toa_sigma=toa_sigma, seed=3))
    tdoa = [r for r in records if isinstance(r, TdoaRecord)]
    assert all(r.variance == 2.0 * toa_sigma**2 for r in tdoa)


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(rss_sigma=-1.0)
    with pytest.raises(ValueError):
        NoiseConfig(toa_sigma=-1e-9)
