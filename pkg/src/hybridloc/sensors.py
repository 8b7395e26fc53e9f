"""Measurement models: log-distance path-loss RSS and reference-pair TDOA.

A measurement frame stacks m RSS entries (dBm) followed by n TDOA entries
(seconds), each with its own noise variance; the noise covariance is the
diagonal of those variances.  Predictions and the analytic position
Jacobian are computed for the whole stack at once.  Distances are clamped
to a small floor so the log and unit-vector singularities at an anchor
position stay bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .core import IX, IY, SPEED_OF_LIGHT, Anchor, AnchorLayout

# Closest distance (m) at which the models are evaluated; closer positions
# are treated as being at the floor.
DISTANCE_FLOOR = 0.1

_LOG10 = np.log(10.0)


class UnknownAnchor(KeyError):
    """A frame references an anchor id missing from the layout."""


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path-loss parameters.

    `p0` is the received power (dBm) at the 1 m reference distance, shared
    by all anchors unless overridden per anchor id; `gamma` is the decay
    exponent.
    """

    p0: float = -45.0
    gamma: float = 2.7
    d0: float = 1.0
    p0_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.gamma > 0.0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.d0 != 1.0:
            raise ValueError("reference distance d0 is fixed at 1.0 m")

    def p0_for(self, anchor_id):
        return self.p0_overrides.get(anchor_id, self.p0)


class RssEntry(NamedTuple):
    anchor_id: str
    value: float  # dBm
    variance: float  # dBm^2


class TdoaEntry(NamedTuple):
    anchor_id: str  # measured anchor
    ref_id: str  # reference anchor
    value: float  # seconds
    variance: float  # seconds^2


@dataclass(frozen=True)
class MeasurementFrame:
    """One epoch of stacked measurements: RSS entries then TDOA entries."""

    timestamp: float
    rss: tuple[RssEntry, ...] = ()
    tdoa: tuple[TdoaEntry, ...] = ()

    @property
    def size(self):
        return len(self.rss) + len(self.tdoa)

    def values(self):
        """Measured values stacked in frame order."""
        return np.array(
            [e.value for e in self.rss] + [e.value for e in self.tdoa], dtype=float
        )

    def variances(self):
        return np.array(
            [e.variance for e in self.rss] + [e.variance for e in self.tdoa],
            dtype=float,
        )

    def without_tdoa(self):
        return replace(self, tdoa=())


def validate_frame(frame: MeasurementFrame, layout: AnchorLayout):
    """Check frame invariants against a layout; raises on violation."""
    if frame.size < 1:
        raise ValueError("frame must contain at least one measurement")
    for e in frame.rss:
        if layout.get(e.anchor_id) is None:
            raise UnknownAnchor(e.anchor_id)
        if not (e.variance > 0.0):
            raise ValueError(f"RSS variance must be > 0, got {e.variance}")
    for e in frame.tdoa:
        if layout.get(e.anchor_id) is None:
            raise UnknownAnchor(e.anchor_id)
        if layout.get(e.ref_id) is None:
            raise UnknownAnchor(e.ref_id)
        if e.anchor_id == e.ref_id:
            raise ValueError("TDOA pair must use two distinct anchors")
        if layout.reference_id is not None and e.ref_id != layout.reference_id:
            raise ValueError(
                f"TDOA reference {e.ref_id!r} is not the layout reference "
                f"{layout.reference_id!r}"
            )
        if not (e.variance > 0.0):
            raise ValueError(f"TDOA variance must be > 0, got {e.variance}")


def _check_point(pos):
    pos = np.asarray(pos, dtype=float)
    if pos.shape != (2,) or not np.all(np.isfinite(pos)):
        raise ValueError(f"expected a finite 2D point, got {pos}")
    return pos


def _clamped_distances(pos, anchors_xy):
    """Euclidean distances from pos to each anchor row, floored."""
    delta = pos[None, :] - anchors_xy
    d = np.hypot(delta[:, 0], delta[:, 1])
    return np.maximum(d, DISTANCE_FLOOR), delta


def rss_values(pos, anchors_xy, p0s, gamma):
    d, _ = _clamped_distances(pos, anchors_xy)
    return p0s - 10.0 * gamma * np.log10(d)


def tdoa_values(pos, k_xy, l_xy, c=SPEED_OF_LIGHT):
    dk, _ = _clamped_distances(pos, k_xy)
    dl, _ = _clamped_distances(pos, l_xy)
    return (dk - dl) / c


def rss_jacobian(pos, anchors_xy, gamma):
    """Rows d(RSS)/d(state); velocity columns are zero."""
    d, delta = _clamped_distances(pos, anchors_xy)
    coef = -10.0 * gamma / _LOG10 / (d * d)
    rows = np.zeros((len(d), 4))
    rows[:, IX] = coef * delta[:, 0]
    rows[:, IY] = coef * delta[:, 1]
    return rows


def tdoa_jacobian(pos, k_xy, l_xy, c=SPEED_OF_LIGHT):
    """Rows d(TDOA)/d(state): difference of unit vectors over c."""
    dk, delta_k = _clamped_distances(pos, k_xy)
    dl, delta_l = _clamped_distances(pos, l_xy)
    rows = np.zeros((len(dk), 4))
    rows[:, IX] = (delta_k[:, 0] / dk - delta_l[:, 0] / dl) / c
    rows[:, IY] = (delta_k[:, 1] / dk - delta_l[:, 1] / dl) / c
    return rows


def predict_rss(pos, anchor: Anchor, params: PathLossParams):
    """Predicted received power (dBm) at an anchor for a tag position."""
    pos = _check_point(pos)
    vals = rss_values(pos, anchor.xy[None, :], np.array([params.p0_for(anchor.id)]),
                      params.gamma)
    return float(vals[0])


def predict_tdoa(pos, anchor_k: Anchor, anchor_l: Anchor, c=SPEED_OF_LIGHT):
    """Predicted arrival-time difference (s) between two anchors."""
    if anchor_k.id == anchor_l.id:
        raise ValueError("TDOA needs two distinct anchors")
    pos = _check_point(pos)
    vals = tdoa_values(pos, anchor_k.xy[None, :], anchor_l.xy[None, :], c)
    return float(vals[0])


@dataclass(frozen=True)
class MeasurementPrediction:
    """Stacked predicted values in frame order, optionally with the Jacobian."""

    values: np.ndarray
    jacobian: np.ndarray | None = None


class FrameModel:
    """Per-frame measurement model with precomputed geometry.

    Binds one frame to a layout and path-loss parameters, exposing the
    measured vector, the diagonal noise variances, and `predict(state)`.
    Both Kalman filters and the measurement simulator go through this
    single code path so predictions agree bit for bit.
    """

    def __init__(self, frame: MeasurementFrame, layout: AnchorLayout,
                 params: PathLossParams):
        validate_frame(frame, layout)
        self.frame = frame
        self.measured = frame.values()
        self.noise_diag = frame.variances()
        self._gamma = params.gamma
        self._rss_xy = np.array(
            [layout.get(e.anchor_id).xy for e in frame.rss], dtype=float
        ).reshape(len(frame.rss), 2)
        self._rss_p0 = np.array(
            [params.p0_for(e.anchor_id) for e in frame.rss], dtype=float
        )
        self._k_xy = np.array(
            [layout.get(e.anchor_id).xy for e in frame.tdoa], dtype=float
        ).reshape(len(frame.tdoa), 2)
        self._l_xy = np.array(
            [layout.get(e.ref_id).xy for e in frame.tdoa], dtype=float
        ).reshape(len(frame.tdoa), 2)

    @property
    def size(self):
        return self.frame.size

    def predict(self, state, jacobian=False):
        """Predicted measurement vector at a state, plus Jacobian on request."""
        state = np.asarray(state, dtype=float)
        if not np.all(np.isfinite(state)):
            raise ValueError(f"state must be finite, got {state}")
        pos = state[[IX, IY]]
        values = np.concatenate([
            rss_values(pos, self._rss_xy, self._rss_p0, self._gamma),
            tdoa_values(pos, self._k_xy, self._l_xy),
        ])
        if not jacobian:
            return values, None
        h = np.vstack([
            rss_jacobian(pos, self._rss_xy, self._gamma),
            tdoa_jacobian(pos, self._k_xy, self._l_xy),
        ])
        return values, h


def predict_frame(state, frame, layout, params, want_jacobian=False):
    """Stacked predictions (and optional Jacobian) for one frame."""
    model = FrameModel(frame, layout, params)
    values, jac = model.predict(state, jacobian=want_jacobian)
    return MeasurementPrediction(values=values, jacobian=jac)
