"""Published reference figures from the original study's evaluation.

These numbers depend on the original model weights and the private
validation data, so they cannot be recomputed here. They are kept as
documented fixtures for comparison in reports and dashboards, never as
test expectations.
"""

# Overall validation metrics of the segmentation model (single class).
REFERENCE_DETECTION_METRICS = {
    "box": {"precision": 0.93, "recall": 0.944, "map50": 0.96, "map50_95": 0.694},
    "mask": {"precision": 0.925, "recall": 0.932, "map50": 0.96, "map50_95": 0.606},
}

# mAP values read off the published precision-recall curves.
REFERENCE_PR_CURVE_MAP = {"box": 0.946, "mask": 0.953}

# Mean RMSE of the two depth models on the 50-pair hold-out set. The unit
# was not stated alongside the figures; treat them as model-relative.
REFERENCE_DEPTH_RMSE = {"densedepth": 1.25, "custom_encoder_decoder": 1.74}
