"""Shared conventions: state layout, covariance helpers, anchors, constants.

The tracked state is a length-4 float vector ordered (x, vx, y, vy), with
positions in meters and velocities in meters/second.  Covariances are 4x4,
kept symmetric by explicit symmetrization after every filter step.  RSS
values are in dBm, time differences in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s, exact SI value

STATE_DIM = 4
# Indices into the state vector (x, vx, y, vy).
IX, IVX, IY, IVY = 0, 1, 2, 3

# Covariance health tolerances: symmetry relative to the largest entry,
# eigenvalue floor relative to the largest eigenvalue.
SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-10

# Jitter ladder for Cholesky repair, scaled by mean diagonal (trace/4).
JITTER_LADDER = (1e-12, 1e-10, 1e-8)


class NotSymmetric(ValueError):
    """Matrix asymmetry exceeds the allowed tolerance."""


class IndefiniteBeyondRepair(ValueError):
    """Cholesky failed even after the full jitter ladder."""


def state_vector(x, vx, y, vy):
    """Build a state vector; rejects non-finite components."""
    s = np.array([x, vx, y, vy], dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError(f"state components must be finite, got {s}")
    return s


def state_position(state):
    """The (x, y) position slice of a state vector."""
    state = np.asarray(state, dtype=float)
    return state[[IX, IY]]


def symmetrize(m):
    """Map m to (m + m^T)/2.  Idempotent."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def asymmetry(m):
    """Largest absolute difference between m and its transpose."""
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m - m.T))) if m.size else 0.0


def is_symmetric(m, rtol=1e-8):
    scale = max(1.0, float(np.max(np.abs(m))))
    return asymmetry(m) <= rtol * scale


def covariance_ok(cov, sym_rtol=SYMMETRY_RTOL, psd_rtol=PSD_RTOL):
    """Check the covariance invariants: symmetric, eigenvalues >= -tol."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        return False
    if not np.all(np.isfinite(cov)):
        return False
    scale = max(1.0, float(np.max(np.abs(cov))))
    if asymmetry(cov) > sym_rtol * scale:
        return False
    w = np.linalg.eigvalsh(symmetrize(cov))
    w_max = max(float(w[-1]), 0.0)
    return bool(w[0] >= -psd_rtol * max(w_max, 1e-300))


def cholesky_psd(m, sym_rtol=1e-8):
    """Lower-triangular Cholesky factor with diagonal-jitter repair.

    Returns (factor, jittered).  `jittered` is True when plain Cholesky
    failed and a small multiple of the mean diagonal had to be added.
    The all-zero matrix factors to zero without repair.

    Raises NotSymmetric when the input asymmetry exceeds `sym_rtol`
    (relative to the largest entry) and IndefiniteBeyondRepair when no
    rung of the jitter ladder produces a factor.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not is_symmetric(m, rtol=sym_rtol):
        raise NotSymmetric(f"asymmetry {asymmetry(m):.3e} exceeds tolerance")
    m = symmetrize(m)
    if not m.any():
        return np.zeros_like(m), False
    try:
        return np.linalg.cholesky(m), False
    except np.linalg.LinAlgError:
        pass
    n = m.shape[0]
    scale = float(np.trace(m)) / n
    for eps in JITTER_LADDER:
        try:
            return np.linalg.cholesky(m + eps * scale * np.eye(n)), True
        except np.linalg.LinAlgError:
            continue
    raise IndefiniteBeyondRepair(
        f"matrix not factorable after jitter up to {JITTER_LADDER[-1]:g}*trace/{n}"
    )


def clip_psd(m, scale_diag=None, floor=1e-12):
    """Symmetrize and, if needed, clip eigenvalues to restore PSD.

    The clip is performed in a diagonally equilibrated space so that
    blocks with very different units (dBm^2 vs s^2) are treated evenly:
    with D = diag(1/sqrt(scale)), the eigenvalues of D m D are clipped at
    `floor` and mapped back.  `scale_diag` defaults to the matrix diagonal.

    Returns (matrix, clipped) where `clipped` reports whether a repair
    was needed (minimum eigenvalue below -PSD_RTOL relative).
    """
    m = symmetrize(m)
    if scale_diag is None:
        scale_diag = np.diag(m).copy()
    scale = np.maximum(np.asarray(scale_diag, dtype=float), 1e-300)
    d = 1.0 / np.sqrt(scale)
    c = symmetrize(m * np.outer(d, d))
    w, v = np.linalg.eigh(c)
    w_max = max(float(w[-1]), 0.0)
    if w[0] >= -PSD_RTOL * max(w_max, floor):
        return m, False
    w = np.maximum(w, floor)
    c = symmetrize((v * w) @ v.T)
    s = np.sqrt(scale)
    return symmetrize(c * np.outer(s, s)), True


def scaled_condition(m):
    """Condition number after Jacobi equilibration by the diagonal.

    Measurement blocks carry different units, so the raw condition number
    of an innovation covariance reflects unit choices rather than actual
    degeneracy; equilibrating by the diagonal removes that artifact.
    """
    m = np.asarray(m, dtype=float)
    diag = np.diag(m)
    if np.any(~np.isfinite(diag)) or np.any(diag <= 0):
        return np.inf
    d = 1.0 / np.sqrt(diag)
    return float(np.linalg.cond(symmetrize(m * np.outer(d, d))))


def solve_spd_scaled(m, rhs):
    """Solve m @ x = rhs for symmetric positive (semi)definite m.

    Uses diagonal equilibration before the solve for the same unit-mixing
    reason as `scaled_condition`.
    """
    m = np.asarray(m, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    d = 1.0 / np.sqrt(np.maximum(np.diag(m), 1e-300))
    ms = symmetrize(m * np.outer(d, d))
    xs = np.linalg.solve(ms, rhs * d[:, None] if rhs.ndim == 2 else rhs * d)
    return xs * d[:, None] if rhs.ndim == 2 else xs * d


@dataclass(frozen=True)
class Anchor:
    """Fixed receiver at a known planar position.

    `ble` and `uwb` flag which measurement kinds the anchor provides.
    """

    id: str
    position: tuple[float, float]
    ble: bool = True
    uwb: bool = False

    def __post_init__(self):
        if not np.all(np.isfinite(self.position)) or len(self.position) != 2:
            raise ValueError(f"anchor {self.id!r}: position must be a finite 2D point")

    @property
    def xy(self):
        return np.array(self.position, dtype=float)


@dataclass(frozen=True)
class AnchorLayout:
    """Ordered anchor set plus the designated TDOA reference anchor.

    All time-difference measurements are formed against the single
    reference anchor, giving #UWB - 1 independent pairs.
    """

    anchors: tuple[Anchor, ...]
    reference_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(self.anchors))
        ids = [a.id for a in self.anchors]
        if len(set(ids)) != len(ids):
            raise ValueError("anchor ids must be unique within a layout")
        if sum(a.ble for a in self.anchors) < 3:
            raise ValueError("layout needs at least 3 BLE-capable anchors")
        uwb = [a for a in self.anchors if a.uwb]
        if uwb:
            ref = self.get(self.reference_id) if self.reference_id else None
            if ref is None or not ref.uwb:
                raise ValueError(
                    "layout with UWB anchors needs a UWB-capable reference anchor"
                )

    def get(self, anchor_id):
        for a in self.anchors:
            if a.id == anchor_id:
                return a
        return None

    @property
    def ble_anchors(self):
        return tuple(a for a in self.anchors if a.ble)

    @property
    def uwb_anchors(self):
        return tuple(a for a in self.anchors if a.uwb)

    @property
    def reference(self):
        return self.get(self.reference_id) if self.reference_id else None

    def tdoa_pairs(self):
        """(anchor, reference) pairs for every non-reference UWB anchor."""
        ref = self.reference
        if ref is None:
            return ()
        return tuple((a, ref) for a in self.uwb_anchors if a.id != ref.id)
