"""Detection and segmentation evaluation.

Greedy confidence-ordered IoU matching, precision/recall/F1, 101-point
interpolated average precision, mAP50 and mAP50-95, a detection-style
confusion matrix, and the confidence / precision-recall curve samples
used for plotting.

Boxes are derived from polygon extents in normalized coordinates (box IoU
is invariant to the per-axis scale, so no frame size is needed); mask
metrics rasterize the polygons at an explicit frame size.

Summary precision/recall/F1 are reported at the configured confidence
threshold; AP integrates over all confidences.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .raster import Polygon, rasterize_polygon

IOU_GRID = tuple(np.round(np.arange(0.50, 0.96, 0.05), 2))  # 0.50 .. 0.95
RECALL_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class GroundTruth:
    """One annotated pothole region."""

    frame_id: str
    class_id: int
    polygon: Polygon

    def box(self):
        return self.polygon.bounds()

    def mask(self, width, height):
        return rasterize_polygon(self.polygon, width, height)


@dataclass(frozen=True)
class Detection:
    """One predicted region with confidence."""

    frame_id: str
    class_id: int
    polygon: Polygon
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def box(self):
        return self.polygon.bounds()

    def mask(self, width, height):
        return rasterize_polygon(self.polygon, width, height)


@dataclass(frozen=True)
class MatchResult:
    """Assignment of detections to ground truths within one frame."""

    tp: tuple  # (det_index, gt_index, iou)
    fp: tuple  # det indices
    fn: tuple  # gt indices


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts over {pothole, background}.

    The (background, background) cell is structurally undefined for
    detection tasks and reported as 0.
    """

    tp: int
    fp: int
    fn: int
    tn: int = 0

    def table(self):
        """Rows = true {pothole, background}, cols = predicted."""
        return ((self.tp, self.fn), (self.fp, self.tn))


@dataclass(frozen=True)
class ConfidenceCurves:
    """Precision/recall/F1 sampled over confidence thresholds."""

    thresholds: tuple
    precision: tuple
    recall: tuple
    f1: tuple


@dataclass(frozen=True)
class PRCurve:
    """Raw cumulative PR samples plus the 101-point interpolated curve."""

    recall: tuple
    precision: tuple
    grid_recall: tuple
    grid_precision: tuple
    ap: float


@dataclass(frozen=True)
class MetricScalars:
    precision: float
    recall: float
    f1: float
    ap50: float
    ap50_95: float


@dataclass(frozen=True, eq=True)
class KindSummary:
    """All metrics for one prediction kind (box or mask)."""

    per_class: dict
    mean: MetricScalars
    confusion: ConfusionMatrix
    confidence_curves: ConfidenceCurves
    pr_curve: PRCurve


@dataclass(frozen=True)
class MetricsSummary:
    """Box and mask metrics for a detection run."""

    box: KindSummary
    mask: KindSummary
    conf_threshold: float
    iou_threshold: float
    frame_size: tuple


def iou_box(a, b):
    """IoU of two (x_min, y_min, x_max, y_max) boxes; empty-vs-empty is 0."""
    ix = min(a[2], b[2]) - max(a[0], b[0])
    iy = min(a[3], b[3]) - max(a[1], b[1])
    inter = max(ix, 0.0) * max(iy, 0.0)
    area_a = max(a[2] - a[0], 0.0) * max(a[3] - a[1], 0.0)
    area_b = max(b[2] - b[0], 0.0) * max(b[3] - b[1], 0.0)
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def iou_mask(a, b):
    """IoU of two BinaryMasks; empty-vs-empty is 0."""
    if not a.same_shape(b):
        raise DimensionMismatch(f"{a.data.shape} vs {b.data.shape}")
    inter = int(np.count_nonzero(a.data & b.data))
    union = int(np.count_nonzero(a.data | b.data))
    return inter / union if union > 0 else 0.0


def _iou_matrix(dets, gts, kind, frame_size):
    w, h = frame_size
    if kind == "box":
        dboxes = [d.box() for d in dets]
        gboxes = [g.box() for g in gts]
        return np.array(
            [[iou_box(db, gb) for gb in gboxes] for db in dboxes], dtype=np.float64
        ).reshape(len(dets), len(gts))
    if kind == "mask":
        dmasks = [d.mask(w, h) for d in dets]
        gmasks = [g.mask(w, h) for g in gts]
        return np.array(
            [[iou_mask(dm, gm) for gm in gmasks] for dm in dmasks], dtype=np.float64
        ).reshape(len(dets), len(gts))
    raise ValueError(f"kind must be 'box' or 'mask', got {kind!r}")


def _greedy_assign(confidences, matrix, iou_threshold):
    """Greedy matching on a precomputed IoU matrix.

    Detections are visited in descending confidence (ties: input order);
    each takes the unmatched ground truth with the highest IoU >= the
    threshold (ties: lowest index).
    """
    n_det, n_gt = matrix.shape
    order = sorted(range(n_det), key=lambda i: (-confidences[i], i))
    taken = set()
    tp = []
    fp = []
    for i in order:
        best_g = -1
        best_iou = 0.0
        for g in range(n_gt):
            if g in taken:
                continue
            iou = matrix[i, g]
            if iou >= iou_threshold and iou > best_iou:
                best_g = g
                best_iou = iou
        if best_g >= 0:
            taken.add(best_g)
            tp.append((i, best_g, float(best_iou)))
        else:
            fp.append(i)
    fn = [g for g in range(n_gt) if g not in taken]
    tp.sort()
    return MatchResult(tp=tuple(tp), fp=tuple(fp), fn=tuple(fn))


def match(dets, gts, iou_threshold, kind="box", frame_size=(640, 640)):
    """Match one frame's single-class detections to its ground truths."""
    keys = {(d.frame_id, d.class_id) for d in dets} | {
        (g.frame_id, g.class_id) for g in gts
    }
    if len(keys) > 1:
        raise ValueError(f"match() expects a single frame and class, got {sorted(keys)}")
    matrix = _iou_matrix(dets, gts, kind, frame_size)
    return _greedy_assign([d.confidence for d in dets], matrix, iou_threshold)


def precision_recall_f1(tp, fp, fn):
    """Eq. precision = TP/(TP+FP), recall = TP/(TP+FN), F1 harmonic mean.

    Every 0/0 case returns 0.
    """
    p = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    r = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f1 = 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0
    return p, r, f1


class _ScoredPool:
    """Per-(frame, class) IoU matrices, reusable across thresholds."""

    def __init__(self, dets, gts, kind, frame_size):
        self.dets = list(dets)
        self.gts = list(gts)
        self.n_gt = len(self.gts)
        self.groups = {}
        det_groups = {}
        gt_groups = {}
        for idx, d in enumerate(self.dets):
            det_groups.setdefault((d.frame_id, d.class_id), []).append(idx)
        for idx, g in enumerate(self.gts):
            gt_groups.setdefault((g.frame_id, g.class_id), []).append(idx)
        for key in sorted(set(det_groups) | set(gt_groups)):
            d_idx = det_groups.get(key, [])
            g_idx = gt_groups.get(key, [])
            matrix = _iou_matrix(
                [self.dets[i] for i in d_idx],
                [self.gts[i] for i in g_idx],
                kind,
                frame_size,
            )
            self.groups[key] = (d_idx, g_idx, matrix)

    def assign(self, iou_threshold, conf_threshold=None):
        """TP flag per detection at the given thresholds.

        Returns (kept_det_indices, tp_flags, matched_gt_count). Detections
        below conf_threshold are discarded before matching.
        """
        flags = {}
        matched = 0
        kept = []
        for d_idx, g_idx, matrix in self.groups.values():
            local = [
                (pos, i)
                for pos, i in enumerate(d_idx)
                if conf_threshold is None
                or self.dets[i].confidence >= conf_threshold
            ]
            sub = matrix[[pos for pos, _ in local], :] if local else matrix[:0, :]
            confs = [self.dets[i].confidence for _, i in local]
            result = _greedy_assign(confs, sub, iou_threshold)
            tp_local = {t[0] for t in result.tp}
            matched += len(result.tp)
            for j, (_, i) in enumerate(local):
                flags[i] = j in tp_local
                kept.append(i)
        kept.sort()
        return kept, flags, matched

    def cumulative_curve(self, iou_threshold):
        """Recall/precision over detections sorted by descending confidence."""
        kept, flags, _ = self.assign(iou_threshold)
        order = sorted(
            kept, key=lambda i: (-self.dets[i].confidence, self.dets[i].frame_id, i)
        )
        tp = np.array([flags[i] for i in order], dtype=np.float64)
        ctp = np.cumsum(tp)
        cfp = np.cumsum(1.0 - tp)
        recall = ctp / self.n_gt if self.n_gt > 0 else np.zeros_like(ctp)
        with np.errstate(invalid="ignore"):
            precision = np.where(ctp + cfp > 0, ctp / (ctp + cfp), 0.0)
        return recall, precision


def _ap_from_curve(recall, precision):
    """101-point interpolated AP (recall grid 0.00 .. 1.00 step 0.01)."""
    if recall.size == 0:
        return 0.0
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_GRID, side="left")
    sampled = np.where(idx < recall.size, envelope[np.minimum(idx, recall.size - 1)], 0.0)
    return float(sampled.mean())


def average_precision(dets, gts, iou_threshold=0.5, kind="box", frame_size=(640, 640)):
    """AP across all frames at one IoU threshold."""
    pool = _ScoredPool(dets, gts, kind, frame_size)
    recall, precision = pool.cumulative_curve(iou_threshold)
    return _ap_from_curve(recall, precision)


def _classes(dets, gts):
    cls = sorted({g.class_id for g in gts})
    if not cls:
        cls = sorted({d.class_id for d in dets})
    return cls


def map_suite(dets, gts, kind="box", frame_size=(640, 640)):
    """(mAP50, mAP50-95): mean over classes, then over IoU thresholds."""
    classes = _classes(dets, gts)
    if not classes:
        return 0.0, 0.0
    ap50 = []
    ap50_95 = []
    for c in classes:
        c_dets = [d for d in dets if d.class_id == c]
        c_gts = [g for g in gts if g.class_id == c]
        pool = _ScoredPool(c_dets, c_gts, kind, frame_size)
        aps = []
        for tau in IOU_GRID:
            recall, precision = pool.cumulative_curve(tau)
            aps.append(_ap_from_curve(recall, precision))
        ap50.append(aps[0])
        ap50_95.append(float(np.mean(aps)))
    return float(np.mean(ap50)), float(np.mean(ap50_95))


def confusion_matrix(dets, gts, conf_threshold=0.25, iou_threshold=0.5,
                     kind="box", frame_size=(640, 640)):
    """Detection confusion counts at fixed thresholds.

    Matched detections count as (pothole, pothole); surviving unmatched
    detections as predicted-pothole-on-background; unmatched ground
    truths as missed potholes.
    """
    pool = _ScoredPool(dets, gts, kind, frame_size)
    kept, _, matched = pool.assign(iou_threshold, conf_threshold)
    tp = matched
    fp = len(kept) - tp
    fn = len(gts) - tp
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn)


def curves(dets, gts, kind="box", iou_threshold=0.5, frame_size=(640, 640)):
    """Confidence sweep curves plus the PR curve at one IoU threshold.

    The sweep visits every distinct confidence plus {0, 1}; at each
    threshold the detections below it are discarded and the remainder
    rematched, exactly as a pointwise recomputation would.
    """
    pool = _ScoredPool(dets, gts, kind, frame_size)
    thresholds = sorted({d.confidence for d in dets} | {0.0, 1.0})
    ps, rs, f1s = [], [], []
    for t in thresholds:
        kept, _, matched = pool.assign(iou_threshold, t)
        p, r, f1 = precision_recall_f1(matched, len(kept) - matched, len(gts) - matched)
        ps.append(p)
        rs.append(r)
        f1s.append(f1)
    conf = ConfidenceCurves(
        thresholds=tuple(thresholds),
        precision=tuple(ps),
        recall=tuple(rs),
        f1=tuple(f1s),
    )
    recall, precision = pool.cumulative_curve(iou_threshold)
    pr = PRCurve(
        recall=tuple(float(x) for x in recall),
        precision=tuple(float(x) for x in precision),
        grid_recall=tuple(float(x) for x in RECALL_GRID),
        grid_precision=tuple(
            float(x)
            for x in _interpolated_grid(recall, precision)
        ),
        ap=_ap_from_curve(recall, precision),
    )
    return conf, pr


def _interpolated_grid(recall, precision):
    if recall.size == 0:
        return np.zeros_like(RECALL_GRID)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_GRID, side="left")
    return np.where(idx < recall.size, envelope[np.minimum(idx, recall.size - 1)], 0.0)


def summarize(dets, gts, conf_threshold=0.25, iou_threshold=0.5,
              frame_size=(640, 640)):
    """Full MetricsSummary over both kinds."""
    kinds = {}
    for kind in ("box", "mask"):
        per_class = {}
        classes = _classes(dets, gts)
        for c in classes:
            c_dets = [d for d in dets if d.class_id == c]
            c_gts = [g for g in gts if g.class_id == c]
            pool = _ScoredPool(c_dets, c_gts, kind, frame_size)
            kept, _, matched = pool.assign(iou_threshold, conf_threshold)
            p, r, f1 = precision_recall_f1(
                matched, len(kept) - matched, len(c_gts) - matched
            )
            ap50, ap50_95 = map_suite(c_dets, c_gts, kind, frame_size)
            per_class[c] = MetricScalars(
                precision=p, recall=r, f1=f1, ap50=ap50, ap50_95=ap50_95
            )
        if per_class:
            mean = MetricScalars(
                precision=float(np.mean([m.precision for m in per_class.values()])),
                recall=float(np.mean([m.recall for m in per_class.values()])),
                f1=float(np.mean([m.f1 for m in per_class.values()])),
                ap50=float(np.mean([m.ap50 for m in per_class.values()])),
                ap50_95=float(np.mean([m.ap50_95 for m in per_class.values()])),
            )
        else:
            mean = MetricScalars(0.0, 0.0, 0.0, 0.0, 0.0)
        confusion = confusion_matrix(
            dets, gts, conf_threshold, iou_threshold, kind, frame_size
        )
        confidence_curves, pr_curve = curves(
            dets, gts, kind, iou_threshold, frame_size
        )
        kinds[kind] = KindSummary(
            per_class=per_class,
            mean=mean,
            confusion=confusion,
            confidence_curves=confidence_curves,
            pr_curve=pr_curve,
        )
    return MetricsSummary(
        box=kinds["box"],
        mask=kinds["mask"],
        conf_threshold=conf_threshold,
        iou_threshold=iou_threshold,
        frame_size=tuple(frame_size),
    )
