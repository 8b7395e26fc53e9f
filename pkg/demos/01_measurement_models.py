#!/usr/bin/env python3
"""Tour of the measurement models: path-loss RSS, TDOA, and the Jacobian.

Shows how received power falls off with distance, how arrival-time
differences trace hyperbolas, and how close the analytic measurement
Jacobian is to finite differences.
"""
import numpy as np

from hybridloc import (Anchor, AnchorLayout, MeasurementFrame, PathLossParams,
                       RssEntry, SPEED_OF_LIGHT, TdoaEntry, predict_frame,
                       predict_rss, predict_tdoa)

params = PathLossParams(p0=-45.0, gamma=2.7)
anchor = Anchor("A", (0.0, 0.0), ble=True, uwb=True)

print("RSS vs distance (p0 = -45 dBm at 1 m, gamma = 2.7):")
for d in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
    rss = predict_rss(np.array([d, 0.0]), anchor, params)
    bar = "#" * int((rss + 100) / 2)
    print(f"  {d:5.1f} m -> {rss:7.2f} dBm  {bar}")

print("\nTDOA against a pair 6 m apart (positive = closer to the reference):")
k = Anchor("K", (-3.0, 0.0), uwb=True)
ref = Anchor("R", (3.0, 0.0), uwb=True)
for x in (-6.0, -3.0, 0.0, 3.0, 6.0):
    t = predict_tdoa(np.array([x, 2.0]), k, ref)
    print(f"  tag x={x:5.1f} m -> {t * 1e9:7.3f} ns  ({t * SPEED_OF_LIGHT:6.2f} m range difference)")

print("\nStacked frame prediction with Jacobian at (4.0, 2.5):")
layout = AnchorLayout(
    anchors=(
        Anchor("A1", (0.0, 0.0), ble=True, uwb=True),
        Anchor("A2", (8.0, 0.0), ble=True, uwb=True),
        Anchor("A3", (4.0, 6.0), ble=True, uwb=True),
    ),
    reference_id="A1",
)
frame = MeasurementFrame(
    timestamp=0.0,
    rss=tuple(RssEntry(a.id, -60.0, 16.0) for a in layout.ble_anchors),
    tdoa=tuple(TdoaEntry(a.id, r.id, 0.0, 2e-18) for a, r in layout.tdoa_pairs()),
)
state = np.array([4.0, 1.0, 2.5, 0.0])
pred = predict_frame(state, frame, layout, params, want_jacobian=True)
print("  predicted vector:", np.round(pred.values, 4).tolist())
print("  Jacobian rows (x, vx, y, vy); TDOA rows scaled by c to meters/meter:")
for label, row in zip(["RSS A1", "RSS A2", "RSS A3", "TDOA A2-A1", "TDOA A3-A1"],
                      pred.jacobian):
    shown = row * SPEED_OF_LIGHT if label.startswith("TDOA") else row
    print(f"    {label:11s} {np.array2string(shown, precision=3, suppress_small=True)}")

h = 1e-6
fd = np.zeros_like(pred.jacobian)
for col in range(4):
    plus, minus = state.copy(), state.copy()
    plus[col] += h
    minus[col] -= h
    fp = predict_frame(plus, frame, layout, params).values
    fm = predict_frame(minus, frame, layout, params).values
    fd[:, col] = (fp - fm) / (2 * h)
print(f"  max |analytic - finite difference| = {np.max(np.abs(pred.jacobian - fd)):.2e}")
print("  (velocity columns are exactly zero: the models only see position)")
