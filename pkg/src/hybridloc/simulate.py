"""Ground-truth trajectory generation and noisy measurement synthesis.

A reference path is a waypoint polyline traversed at constant speed.
Sampling it on the BLE epoch grid provides both the simulation truth and
the evaluation baseline; the synthesized stream contains one RSS record
per BLE anchor per epoch and, at the (possibly slower) UWB cadence, one
TDOA record per reference pairing.  TDOA noise comes from differencing
two independent arrival-time jitters, so entries sharing the reference
anchor are correlated in the data even though the filters model them as
independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AnchorLayout
from .fusion import ScheduleConfig
from .measlog import RssRecord, TdoaRecord
from .sensors import PathLossParams, rss_values, tdoa_values

# Recorded variances must stay positive even for noiseless synthesis.
MIN_RSS_VARIANCE = 1e-12  # dBm^2
MIN_TDOA_VARIANCE = 1e-24  # s^2


@dataclass(frozen=True)
class ReferencePath:
    """Waypoint polyline walked at constant speed."""

    waypoints: tuple[tuple[float, float], ...]
    speed: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(tuple(map(float, w)) for w in self.waypoints))
        pts = np.asarray(self.waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise ValueError("path needs at least 2 planar waypoints")
        if not np.all(np.isfinite(pts)):
            raise ValueError("waypoints must be finite")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0.0):
            raise ValueError("consecutive waypoints must be distinct")
        if not (self.speed > 0.0):
            raise ValueError(f"speed must be > 0, got {self.speed}")

    @property
    def points(self):
        return np.asarray(self.waypoints, dtype=float)

    @property
    def segment_lengths(self):
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)

    @property
    def total_length(self):
        return float(np.sum(self.segment_lengths))

    @property
    def duration(self):
        return self.total_length / self.speed


@dataclass(frozen=True)
class NoiseConfig:
    """Measurement noise levels and the run's RNG seed.

    `toa_sigma` is per-anchor arrival-time jitter; differencing doubles
    the variance of each TDOA entry.
    """

    rss_sigma: float = 4.0  # dB
    toa_sigma: float = 1e-9  # seconds
    seed: int = 0

    def __post_init__(self):
        if self.rss_sigma < 0 or self.toa_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class PathSample:
    """Constant-speed traversal of a path sampled on a fixed-rate grid."""

    path: ReferencePath
    rate: float
    times: np.ndarray  # (N,)
    positions: np.ndarray  # (N, 2)
    velocities: np.ndarray  # (N, 2)


def _locate(path: ReferencePath, arc):
    """Position and velocity at arc length `arc` along the polyline.

    At interior waypoint hits the outgoing segment's direction is used,
    so corners turn instantaneously.
    """
    pts = path.points
    seg_len = path.segment_lengths
    bounds = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = bounds[-1]
    arc = min(max(arc, 0.0), total)
    # side='right' selects the outgoing segment at a boundary hit.
    i = int(np.searchsorted(bounds, arc, side="right")) - 1
    i = min(i, len(seg_len) - 1)
    direction = (pts[i + 1] - pts[i]) / seg_len[i]
    pos = pts[i] + direction * (arc - bounds[i])
    return pos, direction * path.speed


def sample_path(path: ReferencePath, rate):
    """Sample the traversal at `rate` Hz from start to path end."""
    if not (rate > 0.0):
        raise ValueError(f"rate must be > 0, got {rate}")
    n = int(np.floor(path.duration * rate + 1e-9)) + 1
    times = np.arange(n) / rate
    positions = np.empty((n, 2))
    velocities = np.empty((n, 2))
    for k, t in enumerate(times):
        positions[k], velocities[k] = _locate(path, t * path.speed)
    return PathSample(path=path, rate=float(rate), times=times,
                      positions=positions, velocities=velocities)


def synthesize_stream(truth: PathSample, layout: AnchorLayout,
                      params: PathLossParams, sched: ScheduleConfig,
                      noise: NoiseConfig):
    """Generate the time-ordered noisy measurement stream for one walk.

    `truth` must be sampled at the schedule's BLE rate.  Returns a list of
    RSS and TDOA records sorted by timestamp (RSS first within an epoch),
    fully determined by the noise seed.
    """
    if truth.rate != sched.ble_rate:
        raise ValueError(
            f"truth sampled at {truth.rate} Hz but BLE rate is {sched.ble_rate} Hz"
        )
    rng = np.random.default_rng(noise.seed)
    ble = layout.ble_anchors
    ble_xy = np.array([a.xy for a in ble]).reshape(len(ble), 2)
    ble_p0 = np.array([params.p0_for(a.id) for a in ble])
    rss_var = max(noise.rss_sigma**2, MIN_RSS_VARIANCE)

    records = []
    for t, pos in zip(truth.times, truth.positions):
        clean = rss_values(pos, ble_xy, ble_p0, params.gamma)
        noisy = clean + rng.normal(0.0, noise.rss_sigma, size=len(ble))
        for anchor, value in zip(ble, noisy):
            records.append(RssRecord(float(t), anchor.id, float(value), rss_var))

    pairs = layout.tdoa_pairs()
    if sched.uwb_rate > 0.0 and pairs:
        uwb_truth = sample_path(truth.path, sched.uwb_rate)
        k_xy = np.array([a.xy for a, _ in pairs])
        l_xy = np.array([r.xy for _, r in pairs])
        tdoa_var = max(2.0 * noise.toa_sigma**2, MIN_TDOA_VARIANCE)
        uwb_records = []
        for t, pos in zip(uwb_truth.times, uwb_truth.positions):
            clean = tdoa_values(pos, k_xy, l_xy)
            # One arrival-time jitter per anchor; the reference draw is shared.
            jitter = rng.normal(0.0, noise.toa_sigma, size=len(pairs) + 1)
            noisy = clean + jitter[:-1] - jitter[-1]
            for (anchor, ref), value in zip(pairs, noisy):
                uwb_records.append(
                    TdoaRecord(float(t), anchor.id, ref.id, float(value), tdoa_var)
                )
        records.extend(uwb_records)

    records.sort(key=lambda r: (r.timestamp, isinstance(r, TdoaRecord)))
    return records
