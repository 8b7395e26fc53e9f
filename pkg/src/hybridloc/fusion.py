"""Per-track pipeline over the asymmetric BLE/UWB measurement schedule.

Raw measurement records are grouped into epoch frames on the BLE cadence
(BLE carries the primary fix; UWB records join the epoch window containing
their timestamp).  UWB decimation keeps one epoch in D by epoch index,
mirroring post-hoc thinning of a recorded stream.  Each processed frame
drives a time update sized by the actual inter-epoch spacing, then an EKF
or UKF measurement update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import AnchorLayout, IX, IY, state_vector
from .ekf import EkfConfig, SingularInnovation, ekf_update_model
from .measlog import RssRecord, TdoaRecord
from .motion import MotionModel, predict
from .sensors import (DISTANCE_FLOOR, FrameModel, MeasurementFrame,
                      PathLossParams, RssEntry, TdoaEntry)
from .ukf import UkfParams, ukf_update_model

FILTER_KINDS = ("ekf", "ukf", "ble-ekf", "ble-ukf")


class UnsortedInput(ValueError):
    """Measurement records are not in non-decreasing time order."""


class TimeRegression(ValueError):
    """A frame is older than the track it should update."""


class InsufficientAnchors(ValueError):
    """Track initialization needs RSS from at least 3 distinct anchors."""


def filter_uses_uwb(kind):
    if kind not in FILTER_KINDS:
        raise ValueError(f"filter kind must be one of {FILTER_KINDS}, got {kind!r}")
    return not kind.startswith("ble-")


@dataclass(frozen=True)
class ScheduleConfig:
    """BLE/UWB packet rates and post-processing UWB decimation.

    `uwb_rate` of 0 means BLE-only operation.  `decimation` keeps TDOA
    entries only in epochs whose index is a multiple of D.
    """

    ble_rate: float = 3.0
    uwb_rate: float = 3.0
    decimation: int = 1

    def __post_init__(self):
        if not (self.ble_rate > 0.0):
            raise ValueError(f"ble_rate must be > 0, got {self.ble_rate}")
        if not (self.uwb_rate >= 0.0):
            raise ValueError(f"uwb_rate must be >= 0, got {self.uwb_rate}")
        if not (isinstance(self.decimation, int) and self.decimation >= 1):
            raise ValueError(f"decimation must be an integer >= 1, got {self.decimation}")


@dataclass(frozen=True)
class InitConfig:
    """Initial uncertainty: position and velocity standard deviations."""

    sigma_pos: float = 3.0
    sigma_vel: float = 1.0


@dataclass(frozen=True)
class TrackingConfig:
    """Everything a track step needs besides the frame itself."""

    layout: AnchorLayout
    path_loss: PathLossParams = field(default_factory=PathLossParams)
    sigma_ax2: float = 0.35
    ekf: EkfConfig = field(default_factory=EkfConfig)
    ukf: UkfParams = field(default_factory=UkfParams)


@dataclass(frozen=True)
class Track:
    """A single tag's filter state plus bookkeeping counters."""

    state: np.ndarray
    cov: np.ndarray
    timestamp: float
    kind: str = "ekf"
    updates: int = 0
    skips: int = 0
    psd_repairs: int = 0
    cholesky_jitters: int = 0

    @property
    def position(self):
        return self.state[[IX, IY]]


def _epoch_index(timestamp, ble_rate):
    # Guard against boundary timestamps landing one ulp below the window.
    return int(math.floor(timestamp * ble_rate + 1e-9))


def assemble_epochs(records, sched: ScheduleConfig):
    """Group a time-ordered record stream into per-epoch frames.

    Epoch windows are 1/ble_rate long.  TDOA entries survive only in
    epochs with index divisible by the decimation factor; frames that end
    up empty are dropped.  Raises UnsortedInput on a time regression in
    the stream.
    """
    frames = []
    by_epoch: dict[int, tuple[list, list]] = {}
    last_t = -math.inf
    for rec in records:
        if rec.timestamp < last_t:
            raise UnsortedInput(
                f"record at t={rec.timestamp} after t={last_t}"
            )
        last_t = rec.timestamp
        idx = _epoch_index(rec.timestamp, sched.ble_rate)
        rss_list, tdoa_list = by_epoch.setdefault(idx, ([], []))
        if isinstance(rec, RssRecord):
            rss_list.append(RssEntry(rec.anchor_id, rec.value, rec.variance))
        elif isinstance(rec, TdoaRecord):
            if idx % sched.decimation == 0:
                tdoa_list.append(
                    TdoaEntry(rec.anchor_id, rec.ref_id, rec.value, rec.variance)
                )
        else:
            raise TypeError(f"not a measurement record: {rec!r}")
    for idx in sorted(by_epoch):
        rss_list, tdoa_list = by_epoch[idx]
        if not rss_list and not tdoa_list:
            continue
        frames.append(
            MeasurementFrame(
                timestamp=idx / sched.ble_rate,
                rss=tuple(rss_list),
                tdoa=tuple(tdoa_list),
            )
        )
    return tuple(frames)


def initialize_track(first_frames, layout: AnchorLayout, params: PathLossParams,
                     kind: str = "ekf", init: InitConfig = InitConfig()):
    """Start a track from the first few frames.

    The initial position is the centroid of the three strongest-RSS
    anchors, weighted by inverse model-implied distance; velocity starts
    at zero with a deliberately wide covariance so the filters can pull
    the estimate in quickly.
    """
    filter_uses_uwb(kind)  # validates the kind
    if isinstance(first_frames, MeasurementFrame):
        first_frames = [first_frames]
    by_anchor: dict[str, list[float]] = {}
    for frame in first_frames:
        for e in frame.rss:
            by_anchor.setdefault(e.anchor_id, []).append(e.value)
    if len(by_anchor) < 3:
        raise InsufficientAnchors(
            f"need RSS from >= 3 distinct anchors, got {len(by_anchor)}"
        )
    mean_rss = {aid: float(np.mean(v)) for aid, v in by_anchor.items()}
    strongest = sorted(mean_rss, key=lambda aid: mean_rss[aid], reverse=True)[:3]

    weights = []
    positions = []
    for aid in strongest:
        anchor = layout.get(aid)
        if anchor is None:
            raise InsufficientAnchors(f"anchor {aid!r} missing from layout")
        # Invert the path-loss model for a rough range estimate.
        d = 10.0 ** ((params.p0_for(aid) - mean_rss[aid]) / (10.0 * params.gamma))
        weights.append(1.0 / max(d, DISTANCE_FLOOR))
        positions.append(anchor.xy)
    weights = np.array(weights) / np.sum(weights)
    pos = weights @ np.array(positions)

    state = state_vector(pos[0], 0.0, pos[1], 0.0)
    cov = np.diag([init.sigma_pos**2, init.sigma_vel**2,
                   init.sigma_pos**2, init.sigma_vel**2])
    timestamp = max(f.timestamp for f in first_frames)
    return Track(state=state, cov=cov, timestamp=timestamp, kind=kind)


def step(track: Track, frame: MeasurementFrame, models: TrackingConfig,
         model_factory=None):
    """Advance a track by one frame: time update then measurement update.

    A singular innovation covariance is not fatal: the prediction is kept
    and the skip counter incremented.  BLE-only tracks drop TDOA entries
    before updating; a frame left empty only advances the prediction.
    `model_factory(frame)` may substitute the measurement model (the
    default binds the frame to the configured layout and path loss).
    """
    dt = frame.timestamp - track.timestamp
    if dt < 0:
        raise TimeRegression(
            f"frame at t={frame.timestamp} precedes track at t={track.timestamp}"
        )
    state, cov = predict(track.state, track.cov,
                         MotionModel(dt=dt, sigma_ax2=models.sigma_ax2))

    if not filter_uses_uwb(track.kind):
        frame = frame.without_tdoa()
    if frame.size == 0:
        return replace(track, state=state, cov=cov, timestamp=frame.timestamp)

    if model_factory is None:
        model = FrameModel(frame, models.layout, models.path_loss)
    else:
        model = model_factory(frame)

    try:
        if track.kind.endswith("ukf"):
            state, cov, report = ukf_update_model(state, cov, model, models.ukf)
        else:
            state, cov, report = ekf_update_model(state, cov, model, models.ekf)
    except SingularInnovation:
        return replace(track, state=state, cov=cov, timestamp=frame.timestamp,
                       skips=track.skips + 1)

    return replace(
        track,
        state=state,
        cov=cov,
        timestamp=frame.timestamp,
        updates=track.updates + 1,
        psd_repairs=track.psd_repairs + int(report.psd_repaired),
        cholesky_jitters=track.cholesky_jitters + int(report.sigma_jittered),
    )
