"""
Depth prediction evaluation
===========================

RMSE against ground truth with missing-pixel handling: holes in the
ground truth never count, no matter what the model predicted there, and
the set-level score is the unweighted mean of per-frame RMSEs.
"""

import numpy as np

from roadchar import rmse
from roadchar.deptheval import evaluate_pairs
from roadchar.raster import DepthMap

rng = np.random.default_rng(1)

# One frame in normalized units, with a hole in the ground truth.
gt = rng.uniform(0.2, 0.8, size=(60, 80))
gt[20:30, 30:45] = np.nan
pred = gt + rng.normal(0.0, 0.02, size=gt.shape)
pred = np.nan_to_num(pred, nan=0.0)

print(f"per-frame rmse: {rmse(pred, gt):.4f} (noise sigma was 0.02)")

# Whatever sits at the missing pixels is ignored.
vandalized = pred.copy()
vandalized[np.isnan(gt)] = 1e9
assert rmse(vandalized, gt) == rmse(pred, gt)
print("values at gt-missing pixels do not affect the score")

# Set-level evaluation in millimeters over DepthMap pairs.
frames = []
for i, offset in enumerate((150, 300)):
    gt_mm = rng.integers(500, 4000, size=(48, 64)).astype(np.uint16)
    pred_mm = np.clip(gt_mm.astype(int) + offset, 0, 65535).astype(np.uint16)
    frames.append((f"f{i}", DepthMap(pred_mm), DepthMap(gt_mm)))

result = evaluate_pairs(frames, units="mm")
for frame in result.per_frame:
    print(f"  {frame.frame_id}: rmse={frame.rmse:.1f} mm over {frame.valid_pixels} px")
print(f"mean rmse: {result.mean_rmse:.1f} {result.units}")
# constant offsets come back exactly: (150 + 300) / 2
assert result.mean_rmse == 225.0
