#!/usr/bin/env python3
"""How localization accuracy degrades as UWB packets become rarer.

Sweeps the post-processing decimation factor from "every epoch" down to
"one epoch in twelve" on the same recorded streams, the same workflow
used on real logs (record once at full rate, thin afterwards).
"""
import numpy as np

from hybridloc.config import preset_config, with_overrides
from hybridloc.experiment import run_experiment

RUNS = 25

print(f"{'D':>3s} {'uwb epochs':>11s} "
      f"{'ekf median':>11s} {'ukf median':>11s} {'ekf >2m':>8s} {'ukf >2m':>8s}")
for decimation in (1, 2, 6, 12):
    cfg = with_overrides(
        preset_config("paper-lowrate"),
        {"runs": RUNS, "schedule": {"decimation": decimation}})
    result = run_experiment(cfg)
    e = result.pool("ekf").traj_errors
    u = result.pool("ukf").traj_errors
    seconds_per_uwb = decimation / cfg.schedule.uwb_rate
    print(f"{decimation:3d} every {seconds_per_uwb:4.1f}s "
          f"{np.median(e):10.3f}m {np.median(u):10.3f}m "
          f"{np.mean(e > 2):7.1%} {np.mean(u > 2):7.1%}")

print("\nThe gap between the filters opens as the UWB duty cycle drops:")
print("with fewer anchoring measurements the predicted state wanders into")
print("regions where the first-order linearization is a poor fit, while the")
print("sigma-point update keeps tracking the skewed measurement geometry.")
