"""
Detection and segmentation metrics
==================================

Score a toy detector against ground truth: IoU matching, precision,
recall, F1, 101-point AP, mAP50 and mAP50-95, the confusion matrix, and
the confidence-sweep curves.
"""

import numpy as np

from roadchar import Detection, GroundTruth, Polygon
from roadchar.metrics import confusion_matrix, curves, map_suite, summarize


def box_polygon(x0, y0, x1, y1):
    return Polygon(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))


# Three annotated potholes over two frames.
gts = [
    GroundTruth("frame-a", 0, box_polygon(0.10, 0.10, 0.30, 0.30)),
    GroundTruth("frame-a", 0, box_polygon(0.55, 0.50, 0.80, 0.75)),
    GroundTruth("frame-b", 0, box_polygon(0.20, 0.20, 0.45, 0.40)),
]

# A detector that nails one, lands a loose box on another, misses the
# third, and hallucinates one region.
dets = [
    Detection("frame-a", 0, box_polygon(0.10, 0.10, 0.30, 0.30), 0.95),
    Detection("frame-a", 0, box_polygon(0.50, 0.47, 0.78, 0.70), 0.70),
    Detection("frame-b", 0, box_polygon(0.70, 0.70, 0.90, 0.90), 0.40),
]

map50, map50_95 = map_suite(dets, gts, kind="box")
print(f"box mAP50 = {map50:.4f}, mAP50-95 = {map50_95:.4f}")

cm = confusion_matrix(dets, gts, conf_threshold=0.25, iou_threshold=0.5)
print(f"confusion: TP={cm.tp} FP={cm.fp} FN={cm.fn} (background row is structural)")

conf_curves, pr = curves(dets, gts, kind="box")
print("confidence sweep:")
for t, p, r, f1 in zip(
    conf_curves.thresholds, conf_curves.precision, conf_curves.recall, conf_curves.f1
):
    print(f"  conf >= {t:.2f}: P={p:.3f} R={r:.3f} F1={f1:.3f}")

# The full summary covers boxes and masks; masks rasterize the polygons.
summary = summarize(dets, gts, conf_threshold=0.25, iou_threshold=0.5,
                    frame_size=(320, 320))
print(
    f"summary: box AP50={summary.box.mean.ap50:.4f} "
    f"mask AP50={summary.mask.mean.ap50:.4f}"
)
