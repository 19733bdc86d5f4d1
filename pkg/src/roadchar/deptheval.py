"""Depth prediction evaluation with missing-pixel handling.

RMSE is computed only over pixels where the ground truth carries a
reading; whatever a model predicts at unrecorded pixels never enters the
score. Aggregation over a test set is the unweighted mean of per-frame
RMSEs (not a pooled-pixel RMSE), so every frame counts equally.

Units: evaluation runs on normalized [0, 1] depths by default; raw
millimeter evaluation is available via ``units="mm"``. Results always
state their unit.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .characterize import normalize_depth
from .errors import DimensionMismatch, MissingCounterpart, NoValidPixels


@dataclass(frozen=True)
class FrameRmse:
    frame_id: str
    rmse: float
    valid_pixels: int


@dataclass(frozen=True)
class DepthEvalResult:
    """Per-frame RMSEs and their unweighted mean."""

    per_frame: tuple
    mean_rmse: float
    units: str


def rmse(pred, gt):
    """Root-mean-square error over valid ground-truth pixels.

    Args:
        pred: predicted depth field (float array, dense).
        gt: ground-truth depth field (float array, NaN = missing).

    Raises:
        DimensionMismatch: shapes differ.
        NoValidPixels: the ground truth has no valid samples.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    valid = ~np.isnan(gt)
    n = int(np.count_nonzero(valid))
    if n == 0:
        raise NoValidPixels("ground truth has no valid depth samples")
    diff = pred[valid] - gt[valid]
    return float(np.sqrt(np.mean(diff * diff)))


def _field_from_map(depth_map, units, max_range_mm):
    if units == "normalized":
        return normalize_depth(depth_map, max_range_mm)
    if units == "mm":
        out = depth_map.data.astype(np.float64)
        out[depth_map.data == depth_map.missing_code] = np.nan
        return out
    raise ValueError(f"units must be 'normalized' or 'mm', got {units!r}")


def evaluate_pairs(pairs, units="normalized", max_range_mm=4500.0):
    """Evaluate (frame_id, pred DepthMap, gt DepthMap) triples.

    Predictions are treated as dense readings; only ground-truth holes
    are excluded.
    """
    per_frame = []
    for frame_id, pred_map, gt_map in pairs:
        gt_field = _field_from_map(gt_map, units, max_range_mm)
        if units == "normalized":
            pred_field = np.clip(
                pred_map.data.astype(np.float64) / max_range_mm, 0.0, 1.0
            )
        else:
            pred_field = pred_map.data.astype(np.float64)
        valid = int(np.count_nonzero(~np.isnan(gt_field)))
        per_frame.append(
            FrameRmse(frame_id=frame_id, rmse=rmse(pred_field, gt_field),
                      valid_pixels=valid)
        )
    if not per_frame:
        raise NoValidPixels("no frames to evaluate")
    mean = float(np.mean([f.rmse for f in per_frame]))
    return DepthEvalResult(per_frame=tuple(per_frame), mean_rmse=mean, units=units)


def evaluate_set(pred_dir, gt_dir, units="normalized", max_range_mm=4500.0):
    """Evaluate two mirrored directories of 16-bit depth PNGs.

    Frames are keyed by file stem; the id sets must coincide.

    Raises:
        MissingCounterpart: lists the unmatched ids on either side.
    """
    from .pngio import read_depth  # local import to keep this module light

    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    pred_ids = {p.stem: p for p in sorted(pred_dir.glob("*.png"))}
    gt_ids = {p.stem: p for p in sorted(gt_dir.glob("*.png"))}
    missing_pred = sorted(set(gt_ids) - set(pred_ids))
    missing_gt = sorted(set(pred_ids) - set(gt_ids))
    if missing_pred or missing_gt:
        raise MissingCounterpart(missing_pred=missing_pred, missing_gt=missing_gt)
    pairs = [
        (fid, read_depth(pred_ids[fid]), read_depth(gt_ids[fid]))
        for fid in sorted(gt_ids)
    ]
    return evaluate_pairs(pairs, units=units, max_range_mm=max_range_mm)
