"""Hybrid RSS/TDOA indoor localization with EKF and UKF tracking.

The library models a tag transmitting BLE packets (received signal
strength at fixed anchors) at a steady rate and UWB packets (arrival-time
differences against a reference anchor) at a lower, programmable rate.
It provides the motion and measurement models, both Kalman-filter
variants, a per-epoch fusion pipeline, a seeded Monte Carlo measurement
simulator, and trajectory-error/ECDF evaluation utilities.
"""

__version__ = "0.1.0"

from .core import (Anchor, AnchorLayout, SPEED_OF_LIGHT, cholesky_psd,
                   covariance_ok, state_vector, symmetrize)
from .ekf import EkfConfig, InnovationReport, SingularInnovation, ekf_update
from .evaluate import (Ecdf, EmptySamples, TrajectoryRecord, compare_runs,
                       ecdf, position_errors, trajectory_error,
                       trajectory_errors)
from .fusion import (FILTER_KINDS, InitConfig, InsufficientAnchors,
                     ScheduleConfig, TimeRegression, Track, TrackingConfig,
                     UnsortedInput, assemble_epochs, initialize_track, step)
from .measlog import MalformedLine, RssRecord, TdoaRecord, read_log, write_log
from .motion import MotionModel, predict, process_noise, transition_matrix
from .sensors import (DISTANCE_FLOOR, MeasurementFrame, MeasurementPrediction,
                      PathLossParams, RssEntry, TdoaEntry, UnknownAnchor,
                      predict_frame, predict_rss, predict_tdoa)
from .simulate import (NoiseConfig, PathSample, ReferencePath, sample_path,
                       synthesize_stream)
from .ukf import (SigmaPointSet, UkfParams, sigma_points,
                  unscented_measurement, ukf_update)
from .config import (ExperimentConfig, ParseError, ValidationError,
                     load_config, parse_config, preset_config, with_overrides)
from .experiment import (ExperimentResult, replay_records, run_experiment,
                         run_seed)
