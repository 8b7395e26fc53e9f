"""Trajectory-error metrics and empirical CDF construction.

The headline metric is the trajectory error: the shortest Euclidean
distance from an estimated position to the reference polyline.  It does
not penalize lag along the path, so in simulation (where truth is
available) the time-aligned position error is also computed as a
secondary metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulate import PathSample, ReferencePath


class EmptySamples(ValueError):
    """An ECDF needs at least one sample."""


@dataclass(frozen=True)
class TrajectoryRecord:
    """Timestamped position estimates plus the reference they are scored against."""

    estimates: np.ndarray  # (N, 3): timestamp, x, y
    reference: ReferencePath
    label: str = ""

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float)
        if est.ndim != 2 or est.shape[1] != 3 or est.shape[0] < 1:
            raise ValueError("estimates must be a nonempty (N, 3) array")
        if np.any(np.diff(est[:, 0]) < 0):
            raise ValueError("estimates must be time-sorted")
        object.__setattr__(self, "estimates", est)

    def errors(self):
        return trajectory_errors(self.estimates[:, 1:3], self.reference)


def _segment_distances(points, a, b):
    """Distance from each point to segment a-b, endpoints clamped."""
    ab = b - a
    denom = float(ab @ ab)
    rel = points - a
    t = np.clip((rel @ ab) / denom, 0.0, 1.0)
    foot = a + t[:, None] * ab
    return np.linalg.norm(points - foot, axis=1)


def trajectory_errors(points, path: ReferencePath):
    """Shortest distance from each point to the path polyline."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pts = path.points
    dists = np.stack([
        _segment_distances(points, pts[i], pts[i + 1])
        for i in range(len(pts) - 1)
    ])
    return dists.min(axis=0)


def trajectory_error(point, path: ReferencePath):
    """Shortest distance from one point to the path polyline."""
    return float(trajectory_errors(np.asarray(point, dtype=float)[None, :], path)[0])


def position_errors(estimates, truth: PathSample):
    """Time-aligned distance to truth, interpolating truth at estimate times.

    Truth is piecewise linear in time, so interpolation is exact between
    samples of the same segment and exact at every sample time.
    """
    est = np.asarray(estimates, dtype=float)
    tx = np.interp(est[:, 0], truth.times, truth.positions[:, 0])
    ty = np.interp(est[:, 0], truth.times, truth.positions[:, 1])
    return np.hypot(est[:, 1] - tx, est[:, 2] - ty)


class Ecdf:
    """Right-continuous empirical CDF: F(t) = #(samples <= t) / N."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0:
            raise EmptySamples("need at least one sample")
        if not np.all(np.isfinite(samples)) or np.any(samples < 0):
            raise ValueError("samples must be finite and >= 0")
        self.samples = np.sort(samples)
        self.n = int(samples.size)

    def __call__(self, t):
        return np.searchsorted(self.samples, t, side="right") / self.n

    def exceedance(self, t):
        """Fraction of samples strictly above t: 1 - F(t)."""
        return 1.0 - self(t)

    def quantile(self, p):
        """Smallest sample x with F(x) >= p, for p in [0, 1]."""
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p must be in [0, 1], got {p}")
        idx = max(int(np.ceil(p * self.n)) - 1, 0)
        return float(self.samples[idx])

    def points(self):
        """(error, F) step points, one per sorted sample; plot-ready."""
        f = np.arange(1, self.n + 1) / self.n
        return np.column_stack([self.samples, f])


def ecdf(samples):
    """Build an Ecdf; raises EmptySamples on an empty input."""
    return Ecdf(samples)


def summarize_errors(label, errors, thresholds):
    """One comparison row: count, median, 90th percentile, exceedances."""
    dist = ecdf(errors)
    row = {
        "label": label,
        "n": dist.n,
        "median_m": dist.quantile(0.5),
        "p90_m": dist.quantile(0.9),
    }
    for t in thresholds:
        row[f"exceedance_{t:g}m"] = float(dist.exceedance(t))
    return row


def compare_runs(a: TrajectoryRecord, b: TrajectoryRecord, thresholds):
    """Side-by-side error statistics for two runs at the given thresholds."""
    return [
        summarize_errors(a.label, a.errors(), thresholds),
        summarize_errors(b.label, b.errors(), thresholds),
    ]
