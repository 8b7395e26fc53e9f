import numpy as np
import pytest

from hybridloc import Anchor, AnchorLayout, cholesky_psd, covariance_ok, symmetrize
from hybridloc.core import (IndefiniteBeyondRepair, NotSymmetric, clip_psd,
                            scaled_condition, solve_spd_scaled, state_vector)

from conftest import random_spd


def test_cholesky_identity():
    factor, jittered = cholesky_psd(np.eye(4))
    assert not jittered
    assert np.array_equal(factor, np.eye(4))


def test_cholesky_diagonal():
    factor, jittered = cholesky_psd(np.diag([4.0, 1.0, 9.0, 16.0]))
    assert not jittered
    assert np.allclose(factor, np.diag([2.0, 1.0, 3.0, 4.0]), atol=0, rtol=0)


def test_cholesky_random_spd_reconstructs():
    # Oracle: the factor must reproduce the input matrix.
    rng = np.random.default_rng(42)
    for _ in range(50):
        a = random_spd(rng)
        factor, jittered = cholesky_psd(a)
        assert not jittered
        assert np.tril(factor).tolist() == factor.tolist()  # lower triangular
        err = np.max(np.abs(factor @ factor.T - a))
        assert err < 1e-9 * max(1.0, np.max(np.abs(a)))


def test_cholesky_zero_matrix():
    factor, jittered = cholesky_psd(np.zeros((4, 4)))
    assert not jittered
    assert np.array_equal(factor, np.zeros((4, 4)))


def test_cholesky_semidefinite_repairs():
    # Rank-deficient PSD matrix fails plain Cholesky but repairs with jitter.
    a = np.diag([1.0, 1.0, 0.0, 0.0])
    factor, jittered = cholesky_psd(a)
    assert jittered
    assert np.max(np.abs(factor @ factor.T - a)) < 1e-9


def test_cholesky_rejects_asymmetric():
    m = np.eye(4)
    m[0, 1] = 0.5
    with pytest.raises(NotSymmetric):
        cholesky_psd(m)


def test_cholesky_indefinite_beyond_repair():
    with pytest.raises(IndefiniteBeyondRepair):
        cholesky_psd(-np.eye(4))


def test_symmetrize_idempotent():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = rng.normal(size=(4, 4))
        s = symmetrize(m)
        assert np.array_equal(symmetrize(s), s)
        assert np.array_equal(s, s.T)


def test_state_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        state_vector(np.nan, 0.0, 0.0, 0.0)
    s = state_vector(1.0, 2.0, 3.0, 4.0)
    assert s.tolist() == [1.0, 2.0, 3.0, 4.0]


def test_covariance_ok():
    assert covariance_ok(np.eye(4))
    assert covariance_ok(np.zeros((4, 4)))
    bad = np.eye(4)
    bad[0, 0] = -1.0
    assert not covariance_ok(bad)
    asym = np.eye(4)
    asym[0, 1] = 1e-3
    assert not covariance_ok(asym)


def test_clip_psd_restores_and_reports():
    m = np.diag([1.0, 1.0, 1.0, -1e-3])
    fixed, clipped = clip_psd(m, scale_diag=np.ones(4))
    assert clipped
    assert covariance_ok(fixed)
    ok = np.diag([2.0, 1.0, 1.0, 1.0])
    same, clipped = clip_psd(ok)
    assert not clipped
    assert np.array_equal(same, ok)


def test_clip_psd_is_scale_aware():
    # Mixed-unit matrix: a tiny block must not be inflated by the clip.
    m = np.diag([10.0, 1e-18])
    fixed, clipped = clip_psd(m, scale_diag=np.diag(m))
    assert not clipped
    assert np.array_equal(fixed, m)


def test_scaled_condition_ignores_units():
    # Diagonal with wildly different units is perfectly conditioned.
    s = np.diag([100.0, 1e-18])
    assert scaled_condition(s) < 10.0
    # A genuinely singular matrix is detected.
    ones = np.ones((3, 3))
    assert scaled_condition(ones + 1e-16 * np.eye(3)) > 1e12


def test_solve_spd_scaled_matches_direct_solve():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = random_spd(rng, n=5)
        b = rng.normal(size=5)
        x = solve_spd_scaled(a, b)
        assert np.allclose(a @ x, b, atol=1e-9)
        bm = rng.normal(size=(5, 3))
        xm = solve_spd_scaled(a, bm)
        assert np.allclose(a @ xm, bm, atol=1e-9)


def test_layout_requires_three_ble_anchors():
    with pytest.raises(ValueError):
        AnchorLayout(anchors=(
            Anchor("A1", (0.0, 0.0)),
            Anchor("A2", (1.0, 0.0)),
        ))


def test_layout_unique_ids():
    with pytest.raises(ValueError):
        AnchorLayout(anchors=(
            Anchor("A1", (0.0, 0.0)),
            Anchor("A1", (1.0, 0.0)),
            Anchor("A3", (2.0, 0.0)),
        ))


def test_layout_reference_must_be_uwb():
    anchors = (
        Anchor("A1", (0.0, 0.0), uwb=True),
        Anchor("A2", (1.0, 0.0), uwb=True),
        Anchor("A3", (2.0, 0.0), ble=True, uwb=False),
    )
    with pytest.raises(ValueError):
        AnchorLayout(anchors=anchors, reference_id="A3")
    layout = AnchorLayout(anchors=anchors, reference_id="A1")
    assert layout.reference.id == "A1"
    assert [a.id for a, r in layout.tdoa_pairs()] == ["A2"]


def test_ble_only_layout_needs_no_reference():
    layout = AnchorLayout(anchors=(
        Anchor("A1", (0.0, 0.0)),
        Anchor("A2", (1.0, 0.0)),
        Anchor("A3", (2.0, 0.0)),
    ))
    assert layout.tdoa_pairs() == ()
