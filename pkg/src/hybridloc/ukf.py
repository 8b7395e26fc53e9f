"""Unscented Kalman filter measurement update.

A scaled sigma-point set is generated from the predicted state and
covariance, pushed through the measurement model, and the reconstructed
measurement moments drive a cross-covariance gain.  The time update is
linear and shared with the EKF, so sigma points are drawn fresh at each
measurement update only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import cholesky_psd, clip_psd, scaled_condition, solve_spd_scaled, symmetrize
from .ekf import CONDITION_LIMIT, InnovationReport, SingularInnovation
from .sensors import FrameModel


@dataclass(frozen=True)
class UkfParams:
    """Scaled unscented-transform parameters.

    alpha controls the spread of the sigma points around the mean, kappa
    is the secondary scale, and beta folds in prior-distribution knowledge
    (2 is exact for Gaussians).  dim is the state dimension; the scaling
    lambda = alpha^2 (dim + kappa) - dim must keep dim + lambda positive.
    """

    alpha: float = 0.5
    kappa: float = 0.0
    beta: float = 2.0
    dim: int = 4

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.dim + self.lam <= 0.0:
            raise ValueError(
                f"dim + lambda must be > 0, got {self.dim + self.lam}"
            )

    @property
    def lam(self):
        return self.alpha**2 * (self.dim + self.kappa) - self.dim


@dataclass(frozen=True)
class SigmaPointSet:
    """2L+1 state-space points with mean and covariance weights.

    Point 0 is the generating mean; points i and L+i sit one scaled
    covariance-root column away on either side.  `jittered` records
    whether the root needed diagonal repair.
    """

    points: np.ndarray  # (2L+1, L)
    mean_weights: np.ndarray  # (2L+1,)
    cov_weights: np.ndarray  # (2L+1,)
    jittered: bool = False

    @property
    def mean(self):
        return self.points[0]


def sigma_points(mean, cov, p: UkfParams = UkfParams()):
    """Scaled sigma points and weights for a Gaussian (mean, cov)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    n = p.dim
    if mean.shape != (n,) or cov.shape != (n, n):
        raise ValueError(f"expected mean ({n},) and cov ({n},{n})")
    scale = n + p.lam
    root, jittered = cholesky_psd(scale * cov)

    points = np.empty((2 * n + 1, n))
    points[0] = mean
    for i in range(n):
        col = root[:, i]
        points[1 + i] = mean + col
        points[1 + n + i] = mean - col

    wm = np.full(2 * n + 1, 1.0 / (2.0 * scale))
    wc = wm.copy()
    wm[0] = p.lam / scale
    wc[0] = p.lam / scale + (1.0 - p.alpha**2 + p.beta)
    return SigmaPointSet(points=points, mean_weights=wm, cov_weights=wc,
                         jittered=jittered)


def unscented_measurement_model(points: SigmaPointSet, model):
    """Push sigma points through a measurement model and take moments.

    Returns (z_hat, p_zz, p_xz, transformed) with the measurement noise
    variances already added to p_zz.
    """
    transformed = np.array([model.predict(x)[0] for x in points.points])
    wm = points.mean_weights
    wc = points.cov_weights

    z_hat = wm @ transformed
    dz = transformed - z_hat
    p_zz = (dz.T * wc) @ dz + np.diag(np.asarray(model.noise_diag, dtype=float))
    dx = points.points - points.mean
    p_xz = (dx.T * wc) @ dz
    return z_hat, symmetrize(p_zz), p_xz, transformed


def unscented_measurement(points, frame, layout, params):
    """Measurement moments of a sigma-point set for one RSS/TDOA frame."""
    model = FrameModel(frame, layout, params)
    return unscented_measurement_model(points, model)


def ukf_update_model(pred_state, pred_cov, model, p: UkfParams = UkfParams()):
    """UKF measurement update against any model with measured/noise_diag/predict.

    Returns (state, covariance, InnovationReport); raises
    SingularInnovation under the same policy as the EKF.  Negative
    zeroth weights can push the reconstructed moments slightly off the
    PSD cone; both the innovation and posterior covariances are repaired
    by equilibrated eigenvalue clipping, and repairs are reported.
    """
    x = np.asarray(pred_state, dtype=float)
    cov = symmetrize(np.asarray(pred_cov, dtype=float))
    points = sigma_points(x, cov, p)
    z_hat, p_zz, p_xz, _ = unscented_measurement_model(points, model)

    r = np.asarray(model.noise_diag, dtype=float)
    p_zz, innovation_clipped = clip_psd(p_zz, scale_diag=np.maximum(np.diag(p_zz), r))
    if not np.all(np.isfinite(p_zz)) or scaled_condition(p_zz) > CONDITION_LIMIT:
        raise SingularInnovation("innovation covariance is numerically singular")

    # K = P_xz P_zz^-1 via a solve on the symmetric P_zz.
    k = solve_spd_scaled(p_zz, p_xz.T).T
    innovation = np.asarray(model.measured, dtype=float) - z_hat
    new_state = x + k @ innovation
    new_cov = cov - k @ p_zz @ k.T
    new_cov, posterior_clipped = clip_psd(new_cov)

    sign, log_det = np.linalg.slogdet(p_zz)
    report = InnovationReport(
        innovation=innovation,
        innovation_cov=p_zz,
        log_det=float(log_det) if sign > 0 else float("-inf"),
        innovation_clipped=innovation_clipped,
        posterior_clipped=posterior_clipped,
        sigma_jittered=points.jittered,
    )
    return new_state, new_cov, report


def ukf_update(pred_state, pred_cov, frame, layout, params,
               p: UkfParams = UkfParams()):
    """UKF measurement update for one RSS/TDOA frame."""
    model = FrameModel(frame, layout, params)
    return ukf_update_model(pred_state, pred_cov, model, p)
