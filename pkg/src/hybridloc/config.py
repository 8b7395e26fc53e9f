"""Experiment configuration: JSON schema, validation, defaults, presets.

A config document is a JSON object; unknown keys are rejected so typos
fail loudly.  Every omitted value is filled from the documented defaults
and the fully resolved document is echoed into the run manifest.  See the
README for the schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .core import Anchor, AnchorLayout
from .ekf import EkfConfig
from .fusion import FILTER_KINDS, InitConfig, ScheduleConfig
from .sensors import PathLossParams
from .simulate import NoiseConfig, ReferencePath
from .ukf import UkfParams


class ParseError(ValueError):
    """The config document is not well-formed JSON."""


class ValidationError(ValueError):
    """The config violates an invariant; the message names the key."""


# Nine hybrid anchors on a 12 m x 6 m two-row grid, one per "room".
DEFAULT_ANCHORS = [
    {"id": "A1", "position": [0.0, 0.0], "ble": True, "uwb": True},
    {"id": "A2", "position": [3.0, 0.0], "ble": True, "uwb": True},
    {"id": "A3", "position": [6.0, 0.0], "ble": True, "uwb": True},
    {"id": "A4", "position": [9.0, 0.0], "ble": True, "uwb": True},
    {"id": "A5", "position": [12.0, 0.0], "ble": True, "uwb": True},
    {"id": "A6", "position": [1.5, 6.0], "ble": True, "uwb": True},
    {"id": "A7", "position": [4.5, 6.0], "ble": True, "uwb": True},
    {"id": "A8", "position": [7.5, 6.0], "ble": True, "uwb": True},
    {"id": "A9", "position": [10.5, 6.0], "ble": True, "uwb": True},
]

# Walk with 1 m margin inside the anchor grid, sweeping the perimeter and
# the middle of the space, ~37 m long.
DEFAULT_WAYPOINTS = [[1.0, 1.0], [11.0, 1.0], [11.0, 5.0], [1.0, 5.0],
                     [1.0, 1.0], [6.0, 1.0], [6.0, 5.0]]

DEFAULTS = {
    "layout": {"reference": "A3", "anchors": DEFAULT_ANCHORS},
    "path": {"waypoints": DEFAULT_WAYPOINTS, "speed_mps": 1.0},
    "path_loss": {"p0_dbm": -45.0, "gamma": 2.7, "p0_overrides": {}},
    "motion": {"sigma_ax2": 0.35},
    "noise": {"rss_sigma_db": 4.0, "toa_sigma_s": 1e-9},
    "schedule": {"ble_rate_hz": 3.0, "uwb_rate_hz": 3.0, "decimation": 1},
    "ukf": {"alpha": 0.5, "kappa": 0.0, "beta": 2.0},
    "ekf": {"covariance_update": "joseph"},
    "init": {"sigma_pos_m": 3.0, "sigma_vel_mps": 1.0},
    "filters": ["ekf", "ukf"],
    "runs": 100,
    "seed": 20200122,
    "thresholds_m": [1.0, 1.5, 2.0, 3.0],
    "output_dir": None,
}

# Named configurations for the two operating points studied with the
# default layout: UWB at the full BLE rate, and UWB thinned to one epoch
# every two seconds with noise raised to stress the nonlinearity.
PRESETS = {
    "paper-highrate": {},
    "paper-lowrate": {
        "schedule": {"ble_rate_hz": 3.0, "uwb_rate_hz": 3.0, "decimation": 6},
        "noise": {"rss_sigma_db": 6.0, "toa_sigma_s": 2e-9},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully resolved experiment settings."""

    layout: AnchorLayout
    path: ReferencePath
    path_loss: PathLossParams
    sigma_ax2: float
    noise: NoiseConfig
    schedule: ScheduleConfig
    ukf: UkfParams
    ekf: EkfConfig
    init: InitConfig
    filters: tuple[str, ...]
    runs: int
    seed: int
    thresholds: tuple[float, ...]
    output_dir: str | None
    resolved: dict = field(repr=False, default_factory=dict)


def _merge(base, override, path=""):
    """Recursive dict merge that rejects keys absent from the defaults."""
    out = dict(base)
    for key, value in override.items():
        if key not in base:
            raise ValidationError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            # p0_overrides maps arbitrary anchor ids, not fixed keys.
            if path + key == "path_loss.p0_overrides":
                out[key] = dict(value)
            else:
                out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = value
    return out


def _fail(key, message):
    raise ValidationError(f"{key}: {message}")


def resolve_config(document):
    """Merge a (possibly partial) config dict over the defaults."""
    if not isinstance(document, dict):
        raise ValidationError("config document must be a JSON object")
    doc = dict(document)
    preset_name = doc.pop("preset", None)
    base = DEFAULTS
    if preset_name is not None:
        if preset_name not in PRESETS:
            _fail("preset", f"unknown preset {preset_name!r}; have {sorted(PRESETS)}")
        base = _merge(DEFAULTS, PRESETS[preset_name], "")
    return _merge(base, doc, "")


def build_config(resolved):
    """Turn a resolved config dict into typed, validated objects."""
    try:
        anchors = tuple(
            Anchor(
                id=str(a["id"]),
                position=(float(a["position"][0]), float(a["position"][1])),
                ble=bool(a.get("ble", True)),
                uwb=bool(a.get("uwb", False)),
            )
            for a in resolved["layout"]["anchors"]
        )
        layout = AnchorLayout(anchors=anchors,
                              reference_id=resolved["layout"]["reference"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"layout: malformed anchor entry ({exc})") from exc
    except ValueError as exc:
        raise ValidationError(f"layout: {exc}") from exc

    def section(name, factory, **kwargs):
        try:
            return factory(**kwargs)
        except ValueError as exc:
            raise ValidationError(f"{name}: {exc}") from exc

    path = section("path", ReferencePath,
                   waypoints=tuple(tuple(w) for w in resolved["path"]["waypoints"]),
                   speed=float(resolved["path"]["speed_mps"]))
    path_loss = section("path_loss", PathLossParams,
                        p0=float(resolved["path_loss"]["p0_dbm"]),
                        gamma=float(resolved["path_loss"]["gamma"]),
                        p0_overrides={str(k): float(v) for k, v in
                                      resolved["path_loss"]["p0_overrides"].items()})
    noise = section("noise", NoiseConfig,
                    rss_sigma=float(resolved["noise"]["rss_sigma_db"]),
                    toa_sigma=float(resolved["noise"]["toa_sigma_s"]),
                    seed=int(resolved["seed"]))
    schedule = section("schedule", ScheduleConfig,
                       ble_rate=float(resolved["schedule"]["ble_rate_hz"]),
                       uwb_rate=float(resolved["schedule"]["uwb_rate_hz"]),
                       decimation=int(resolved["schedule"]["decimation"]))
    ukf = section("ukf", UkfParams,
                  alpha=float(resolved["ukf"]["alpha"]),
                  kappa=float(resolved["ukf"]["kappa"]),
                  beta=float(resolved["ukf"]["beta"]))
    ekf = section("ekf", EkfConfig, form=str(resolved["ekf"]["covariance_update"]))
    init = section("init", InitConfig,
                   sigma_pos=float(resolved["init"]["sigma_pos_m"]),
                   sigma_vel=float(resolved["init"]["sigma_vel_mps"]))

    sigma_ax2 = float(resolved["motion"]["sigma_ax2"])
    if sigma_ax2 < 0:
        _fail("motion.sigma_ax2", "must be >= 0")

    filters = tuple(resolved["filters"])
    if not filters:
        _fail("filters", "need at least one filter kind")
    for kind in filters:
        if kind not in FILTER_KINDS:
            _fail("filters", f"unknown kind {kind!r}; have {FILTER_KINDS}")
    if len(set(filters)) != len(filters):
        _fail("filters", "duplicate filter kinds")

    runs = int(resolved["runs"])
    if runs < 1:
        _fail("runs", "must be >= 1")
    seed = int(resolved["seed"])
    if not (0 <= seed < 2**64):
        _fail("seed", "must fit in 64 bits")
    thresholds = tuple(float(t) for t in resolved["thresholds_m"])
    if any(t <= 0 for t in thresholds):
        _fail("thresholds_m", "thresholds must be > 0")
    output_dir = resolved["output_dir"]
    if output_dir is not None:
        output_dir = str(output_dir)

    return ExperimentConfig(
        layout=layout, path=path, path_loss=path_loss, sigma_ax2=sigma_ax2,
        noise=noise, schedule=schedule, ukf=ukf, ekf=ekf, init=init,
        filters=filters, runs=runs, seed=seed, thresholds=thresholds,
        output_dir=output_dir, resolved=resolved,
    )


def parse_config(text):
    """Parse and validate a JSON config document into an ExperimentConfig."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return build_config(resolve_config(document))


def load_config(path):
    with open(path, "r") as fh:
        return parse_config(fh.read())


def preset_config(name):
    """A fully resolved ExperimentConfig for a named preset."""
    return build_config(resolve_config({"preset": name}))


def with_overrides(cfg: ExperimentConfig, overrides):
    """Rebuild a config with a partial dict merged over its resolved form."""
    return build_config(_merge(cfg.resolved, overrides, ""))
