"""Disparity metrics, half-resolution evaluation, and result-table audits.

Run:  python3 demos/05_metrics_and_means.py
"""

import numpy as np

from stereoforge import (
    FloatMap,
    dataset_mean,
    evaluate_pair,
    half_resolution,
    mean_matches_reported,
)

rng = np.random.default_rng(21)

# Ground truth with 20% missing pixels (LiDAR-like sparsity), and a
# prediction with small noise plus a few gross outliers.
H, W = 80, 120
gt_data = rng.uniform(2, 90, (H, W)).astype(np.float32)
gt = FloatMap(gt_data, rng.uniform(size=(H, W)) > 0.2)

pred_data = gt_data + rng.normal(0, 0.7, (H, W)).astype(np.float32)
outliers = rng.uniform(size=(H, W)) < 0.03
pred_data[outliers] += 25.0
pred = FloatMap(pred_data)

rep = evaluate_pair(pred, gt)
print(f"epe      : {rep.epe:.3f} px over {rep.n_valid} shared pixels")
for tau, pct in sorted(rep.bad.items()):
    print(f"bad-{tau:.0f}    : {pct:6.2f}%")
print(f"d1-all   : {rep.d1_all:6.2f}%")
print(f"coverage : {rep.coverage:.3f}")

# Half-resolution protocol: images shrink, so disparities halve too.
rep_half = evaluate_pair(half_resolution(pred), half_resolution(gt))
print(f"half-res epe: {rep_half.epe:.3f} px (full-res was {rep.epe:.3f})")

# Result tables report a mean over four benchmarks, rounded to two
# decimals. dataset_mean reproduces that arithmetic; the audit helper
# flags rows whose printed mean disagrees with their own cells.
rows = [
    ("row A", (4.20, 5.10, 7.50, 3.80), 5.15),
    ("row B", (4.83, 5.06, 13.03, 7.62), 7.64),   # raw 7.635, rounds half-up
    ("row C", (3.01, 3.26, 2.69, 0.77), 2.68),    # cells average to 2.43
]
for name, cells, printed in rows:
    res = dataset_mean(cells)
    verdict = "ok" if mean_matches_reported(cells, printed) else "MISMATCH"
    print(f"{name}: cells -> {res.raw:.4f} (rounds to {res.rounded}), "
          f"printed {printed}: {verdict}")
