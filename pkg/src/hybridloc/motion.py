"""Discrete white noise acceleration (DWNA) motion model.

Uniform linear motion per axis with acceleration treated as discrete white
noise: the transition and process-noise matrices are block diagonal over
the (x, vx) and (y, vy) pairs, parameterized by the update period and a
single acceleration variance shared by both axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import symmetrize


@dataclass(frozen=True)
class MotionModel:
    """Update period dt (s) and acceleration variance sigma_ax2 ((m/s^2)^2).

    dt = 0 is allowed and yields an identity transition with zero noise,
    which is what a measurement-only step at an unchanged timestamp needs.
    """

    dt: float
    sigma_ax2: float = 0.35

    def __post_init__(self):
        if not (self.dt >= 0.0):
            raise ValueError(f"dt must be >= 0, got {self.dt}")
        if not (self.sigma_ax2 >= 0.0):
            raise ValueError(f"sigma_ax2 must be >= 0, got {self.sigma_ax2}")


def transition_matrix(m: MotionModel):
    """4x4 block-diagonal transition F = diag(Ft, Ft), Ft = [[1, dt], [0, 1]]."""
    f = np.eye(4)
    f[0, 1] = m.dt
    f[2, 3] = m.dt
    return f


def process_noise(m: MotionModel):
    """4x4 block-diagonal DWNA covariance.

    Per-axis block: sigma_ax2 * [[dt^4/4, dt^3/2], [dt^3/2, dt^2]].
    """
    dt = m.dt
    qt = m.sigma_ax2 * np.array(
        [[dt**4 / 4.0, dt**3 / 2.0], [dt**3 / 2.0, dt**2]]
    )
    q = np.zeros((4, 4))
    q[:2, :2] = qt
    q[2:, 2:] = qt
    return q


def predict(state, cov, m: MotionModel):
    """Time update: (F x, F P F^T + Q), covariance symmetrized."""
    state = np.asarray(state, dtype=float)
    cov = np.asarray(cov, dtype=float)
    f = transition_matrix(m)
    new_state = f @ state
    new_cov = symmetrize(f @ cov @ f.T + process_noise(m))
    return new_state, new_cov
