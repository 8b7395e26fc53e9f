"""Extended Kalman filter measurement update.

Linearizes the measurement model at the predicted state and applies the
standard gain equations.  The covariance update defaults to the Joseph
form, which stays positive semidefinite under round-off where the short
form (I - K H) P can drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import clip_psd, scaled_condition, solve_spd_scaled, symmetrize
from .sensors import FrameModel

# Above this (diagonally equilibrated) condition number the innovation
# covariance is treated as singular and the update is refused.
CONDITION_LIMIT = 1e12

COVARIANCE_FORMS = ("joseph", "standard")


class SingularInnovation(RuntimeError):
    """Innovation covariance numerically singular; caller keeps the prediction."""


@dataclass(frozen=True)
class EkfConfig:
    form: str = "joseph"

    def __post_init__(self):
        if self.form not in COVARIANCE_FORMS:
            raise ValueError(f"form must be one of {COVARIANCE_FORMS}, got {self.form!r}")


@dataclass(frozen=True)
class InnovationReport:
    """Diagnostics from one measurement update.

    `innovation_cov` is S for the EKF and P_zz for the UKF; `log_det` is
    its log-determinant.  The flags record numerical repairs: eigenvalue
    clipping of the innovation or posterior covariance, and Cholesky
    jitter during sigma-point generation.
    """

    innovation: np.ndarray
    innovation_cov: np.ndarray
    log_det: float
    innovation_clipped: bool = False
    posterior_clipped: bool = False
    sigma_jittered: bool = False

    @property
    def psd_repaired(self):
        return self.innovation_clipped or self.posterior_clipped


def ekf_update_model(pred_state, pred_cov, model, cfg: EkfConfig = EkfConfig()):
    """EKF measurement update against any model with measured/noise_diag/predict.

    Returns (state, covariance, InnovationReport).  Raises
    SingularInnovation when S = H P H^T + R is numerically singular, in
    which case the caller should keep the prediction.
    """
    x = np.asarray(pred_state, dtype=float)
    p = symmetrize(np.asarray(pred_cov, dtype=float))
    predicted, h = model.predict(x, jacobian=True)
    r = np.asarray(model.noise_diag, dtype=float)
    innovation = np.asarray(model.measured, dtype=float) - predicted

    s = symmetrize(h @ p @ h.T + np.diag(r))
    if not np.all(np.isfinite(s)) or scaled_condition(s) > CONDITION_LIMIT:
        raise SingularInnovation("innovation covariance is numerically singular")

    # K = P H^T S^-1, via a solve on the symmetric S rather than an inverse.
    k = solve_spd_scaled(s, (p @ h.T).T).T
    new_state = x + k @ innovation

    i_kh = np.eye(len(x)) - k @ h
    if cfg.form == "joseph":
        new_cov = i_kh @ p @ i_kh.T + (k * r) @ k.T
    else:
        new_cov = i_kh @ p
    new_cov, posterior_clipped = clip_psd(new_cov)

    sign, log_det = np.linalg.slogdet(s)
    report = InnovationReport(
        innovation=innovation,
        innovation_cov=s,
        log_det=float(log_det) if sign > 0 else float("-inf"),
        posterior_clipped=posterior_clipped,
    )
    return new_state, new_cov, report


def ekf_update(pred_state, pred_cov, frame, layout, params,
               cfg: EkfConfig = EkfConfig()):
    """EKF measurement update for one RSS/TDOA frame."""
    model = FrameModel(frame, layout, params)
    return ekf_update_model(pred_state, pred_cov, model, cfg)
