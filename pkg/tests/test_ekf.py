import numpy as np
import pytest

from hybridloc import (EkfConfig, MeasurementFrame, RssEntry, SingularInnovation,
                       TdoaEntry, covariance_ok, ekf_update, predict_frame)
from hybridloc.ekf import ekf_update_model

from conftest import random_spd


class LinearModel:
    """Measurement stub h(x) = M x with diagonal noise, for oracle checks."""

    def __init__(self, m, z, r_diag):
        self.m = np.asarray(m, dtype=float)
        self.measured = np.asarray(z, dtype=float)
        self.noise_diag = np.asarray(r_diag, dtype=float)

    def predict(self, state, jacobian=False):
        values = self.m @ state
        return values, (self.m.copy() if jacobian else None)


def closed_form_kf(x, p, m, r_diag, z):
    """Textbook linear Kalman update, coded with explicit inverses."""
    r = np.diag(r_diag)
    s = m @ p @ m.T + r
    k = p @ m.T @ np.linalg.inv(s)
    x_new = x + k @ (z - m @ x)
    i_km = np.eye(len(x)) - k @ m
    p_new = i_km @ p @ i_km.T + k @ r @ k.T
    return x_new, p_new


def seeded_linear_case(rng, rows=3):
    x = rng.normal(size=4)
    p = random_spd(rng)
    m = rng.normal(size=(rows, 4))
    r_diag = rng.uniform(0.5, 2.0, size=rows)
    z = m @ x + rng.normal(size=rows)
    return x, p, m, r_diag, z


def test_linear_stub_matches_closed_form():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        x, p, m, r_diag, z = seeded_linear_case(rng)
        state, cov, _ = ekf_update_model(x, p, LinearModel(m, z, r_diag))
        ox, op = closed_form_kf(x, p, m, r_diag, z)
        assert np.max(np.abs(state - ox)) < 1e-12
        assert np.max(np.abs(cov - op)) < 1e-12


def test_zero_innovation_keeps_state_shrinks_cov(layout, params):
    state = np.array([4.0, 0.1, 2.0, -0.1])
    cov = np.eye(4)
    pos = state[[0, 2]]
    frame = MeasurementFrame(
        timestamp=0.0,
        rss=tuple(RssEntry(a.id, 0.0, 16.0) for a in layout.ble_anchors),
        tdoa=tuple(TdoaEntry(a.id, r.id, 0.0, 2e-18)
                   for a, r in layout.tdoa_pairs()),
    )
    clean = predict_frame(state, frame, layout, params).values
    frame = MeasurementFrame(
        timestamp=0.0,
        rss=tuple(RssEntry(e.anchor_id, clean[i], e.variance)
                  for i, e in enumerate(frame.rss)),
        tdoa=tuple(TdoaEntry(e.anchor_id, e.ref_id,
                             clean[len(frame.rss) + j], e.variance)
                   for j, e in enumerate(frame.tdoa)),
    )
    new_state, new_cov, report = ekf_update(state, cov, frame, layout, params)
    assert np.max(np.abs(report.innovation)) == 0.0
    assert np.max(np.abs(new_state - state)) < 1e-12
    assert np.trace(new_cov) <= np.trace(cov) + 1e-9
    assert covariance_ok(new_cov)


def test_uninformative_measurement_limit(layout, params):
    state = np.array([5.0, 0.0, 3.0, 0.0])
    frame = MeasurementFrame(
        timestamp=0.0,
        rss=tuple(RssEntry(a.id, -55.0, 1e12) for a in layout.ble_anchors),
    )
    new_state, _, _ = ekf_update(state, np.eye(4), frame, layout, params)
    assert np.max(np.abs(new_state - state)) < 1e-6


def test_permutation_invariance(layout, params):
    rng = np.random.default_rng(8)
    state = np.array([3.0, 0.2, 4.0, -0.3])
    rss = tuple(RssEntry(a.id, -60.0 + rng.normal(), 16.0)
                for a in layout.ble_anchors)
    tdoa = tuple(TdoaEntry(a.id, r.id, rng.normal() * 1e-9, 2e-18)
                 for a, r in layout.tdoa_pairs())
    frame = MeasurementFrame(timestamp=0.0, rss=rss, tdoa=tdoa)
    shuffled = MeasurementFrame(timestamp=0.0, rss=rss[::-1], tdoa=tdoa[::-1])
    s1, c1, _ = ekf_update(state, np.eye(4), frame, layout, params)
    s2, c2, _ = ekf_update(state, np.eye(4), shuffled, layout, params)
    assert np.max(np.abs(s1 - s2)) < 1e-10
    assert np.max(np.abs(c1 - c2)) < 1e-10


def test_singular_innovation_raises():
    # Two identical rows with vanishing noise make S numerically singular.
    m = np.array([[1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]])
    model = LinearModel(m, np.array([1.0, 1.0]), np.array([1e-30, 1e-30]))
    with pytest.raises(SingularInnovation):
        ekf_update_model(np.zeros(4), np.eye(4), model)


def test_posterior_covariance_health(layout, params):
    rng = np.random.default_rng(9)
    for _ in range(30):
        state = np.array([rng.uniform(0, 12), rng.normal(),
                          rng.uniform(0, 6), rng.normal()])
        cov = random_spd(rng)
        frame = MeasurementFrame(
            timestamp=0.0,
            rss=tuple(RssEntry(a.id, -60.0 + 4 * rng.normal(), 16.0)
                      for a in layout.ble_anchors),
            tdoa=tuple(TdoaEntry(a.id, r.id, rng.normal() * 2e-9, 2e-18)
                       for a, r in layout.tdoa_pairs()),
        )
        for form in ("joseph", "standard"):
            _, new_cov, _ = ekf_update(state, cov, frame, layout, params,
                                       EkfConfig(form=form))
            assert covariance_ok(new_cov)


def test_joseph_and_standard_agree_on_gain(layout, params):
    # Algebraically identical for the exact gain; numerically close.
    state = np.array([4.0, 0.0, 3.0, 0.0])
    cov = np.eye(4) * 2.0
    frame = MeasurementFrame(
        timestamp=0.0,
        rss=tuple(RssEntry(a.id, -58.0, 16.0) for a in layout.ble_anchors),
    )
    _, c1, _ = ekf_update(state, cov, frame, layout, params, EkfConfig("joseph"))
    _, c2, _ = ekf_update(state, cov, frame, layout, params, EkfConfig("standard"))
    assert np.max(np.abs(c1 - c2)) < 1e-10


def test_ekf_config_validation():
    with pytest.raises(ValueError):
        EkfConfig(form="bogus")
