"""Canonical JSON and CSV emission for reports.

JSON documents carry full-precision numbers plus display-rounded string
twins (2 decimals for percentages, 4 for normalized depths by default)
and a schema version field. Serialization is canonical: fixed key order,
two-space indent, trailing newline, so serialize -> parse -> serialize is
byte-identical.

Parsing returns the matching dataclasses; a parsed FrameReport simply has
no raster payload attached to its records.
"""

import csv
import io
import json

from .characterize import DepthStats, FrameReport, PotholeRecord
from .deptheval import DepthEvalResult, FrameRmse
from .metrics import (
    ConfidenceCurves,
    ConfusionMatrix,
    KindSummary,
    MetricScalars,
    MetricsSummary,
    PRCurve,
)

FRAME_REPORT_SCHEMA = "roadchar/frame-report/v1"
METRICS_SCHEMA = "roadchar/metrics/v1"
DEPTH_EVAL_SCHEMA = "roadchar/depth-eval/v1"


def _display(value, decimals):
    return None if value is None else f"{value:.{decimals}f}"


def _record_doc(rec, round_percent, round_depth):
    stats = rec.depth_stats
    return {
        "id": rec.id,
        "pixel_area": rec.pixel_area,
        "contour_area": rec.contour_area,
        "bbox": list(rec.bbox),
        "centroid": list(rec.centroid),
        "p_d": None if stats is None else stats.p_d,
        "s_d": None if stats is None else stats.s_d,
        "valid_pothole_fraction": None if stats is None else stats.valid_pothole_fraction,
        "valid_band_fraction": None if stats is None else stats.valid_band_fraction,
        "p_d_display": None if stats is None else _display(stats.p_d, round_depth),
        "s_d_display": None if stats is None else _display(stats.s_d, round_depth),
        "rp_d_difference": rec.rp_d_difference,
        "rp_d_ratio": rec.rp_d_ratio,
        "rp_d_difference_display": _display(rec.rp_d_difference, round_percent),
        "rp_d_ratio_display": _display(rec.rp_d_ratio, round_percent),
        "severity": rec.severity,
        "depth_warning": rec.depth_warning,
    }


def _record_from_doc(doc):
    stats = None
    if doc["p_d"] is not None:
        stats = DepthStats(
            p_d=doc["p_d"],
            s_d=doc["s_d"],
            valid_pothole_fraction=doc["valid_pothole_fraction"],
            valid_band_fraction=doc["valid_band_fraction"],
        )
    return PotholeRecord(
        id=doc["id"],
        pixel_area=doc["pixel_area"],
        contour_area=doc["contour_area"],
        bbox=tuple(doc["bbox"]),
        centroid=tuple(doc["centroid"]),
        depth_stats=stats,
        rp_d_ratio=doc["rp_d_ratio"],
        rp_d_difference=doc["rp_d_difference"],
        severity=doc["severity"],
        depth_warning=doc["depth_warning"],
    )


def _frame_report_doc(report, round_percent, round_depth):
    return {
        "schema": FRAME_REPORT_SCHEMA,
        "frame_id": report.frame_id,
        "frame_area": report.frame_area,
        "pothole_count": len(report.potholes),
        "total_pothole_area": report.total_pothole_area,
        "damage_percent": report.damage_percent,
        "damage_percent_display": _display(report.damage_percent, round_percent),
        "potholes": [
            _record_doc(rec, round_percent, round_depth) for rec in report.potholes
        ],
    }


def _frame_report_from_doc(doc):
    return FrameReport(
        frame_id=doc["frame_id"],
        frame_area=doc["frame_area"],
        potholes=tuple(_record_from_doc(d) for d in doc["potholes"]),
        total_pothole_area=doc["total_pothole_area"],
        damage_percent=doc["damage_percent"],
    )


def _scalars_doc(m):
    return {
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "ap50": m.ap50,
        "ap50_95": m.ap50_95,
    }


def _scalars_from_doc(doc):
    return MetricScalars(
        precision=doc["precision"],
        recall=doc["recall"],
        f1=doc["f1"],
        ap50=doc["ap50"],
        ap50_95=doc["ap50_95"],
    )


def _kind_doc(k):
    return {
        "per_class": {
            str(c): _scalars_doc(m) for c, m in sorted(k.per_class.items())
        },
        "mean": _scalars_doc(k.mean),
        "confusion": {
            "tp": k.confusion.tp,
            "fp": k.confusion.fp,
            "fn": k.confusion.fn,
            "tn": k.confusion.tn,
        },
        "confidence_curves": {
            "thresholds": list(k.confidence_curves.thresholds),
            "precision": list(k.confidence_curves.precision),
            "recall": list(k.confidence_curves.recall),
            "f1": list(k.confidence_curves.f1),
        },
        "pr_curve": {
            "recall": list(k.pr_curve.recall),
            "precision": list(k.pr_curve.precision),
            "grid_recall": list(k.pr_curve.grid_recall),
            "grid_precision": list(k.pr_curve.grid_precision),
            "ap": k.pr_curve.ap,
        },
    }


def _kind_from_doc(doc):
    return KindSummary(
        per_class={int(c): _scalars_from_doc(m) for c, m in doc["per_class"].items()},
        mean=_scalars_from_doc(doc["mean"]),
        confusion=ConfusionMatrix(
            tp=doc["confusion"]["tp"],
            fp=doc["confusion"]["fp"],
            fn=doc["confusion"]["fn"],
            tn=doc["confusion"]["tn"],
        ),
        confidence_curves=ConfidenceCurves(
            thresholds=tuple(doc["confidence_curves"]["thresholds"]),
            precision=tuple(doc["confidence_curves"]["precision"]),
            recall=tuple(doc["confidence_curves"]["recall"]),
            f1=tuple(doc["confidence_curves"]["f1"]),
        ),
        pr_curve=PRCurve(
            recall=tuple(doc["pr_curve"]["recall"]),
            precision=tuple(doc["pr_curve"]["precision"]),
            grid_recall=tuple(doc["pr_curve"]["grid_recall"]),
            grid_precision=tuple(doc["pr_curve"]["grid_precision"]),
            ap=doc["pr_curve"]["ap"],
        ),
    )


def _metrics_doc(summary):
    return {
        "schema": METRICS_SCHEMA,
        "conf_threshold": summary.conf_threshold,
        "iou_threshold": summary.iou_threshold,
        "frame_size": list(summary.frame_size),
        "box": _kind_doc(summary.box),
        "mask": _kind_doc(summary.mask),
    }


def _metrics_from_doc(doc):
    return MetricsSummary(
        box=_kind_from_doc(doc["box"]),
        mask=_kind_from_doc(doc["mask"]),
        conf_threshold=doc["conf_threshold"],
        iou_threshold=doc["iou_threshold"],
        frame_size=tuple(doc["frame_size"]),
    )


def _depth_eval_doc(result, round_depth):
    return {
        "schema": DEPTH_EVAL_SCHEMA,
        "units": result.units,
        "mean_rmse": result.mean_rmse,
        "mean_rmse_display": _display(result.mean_rmse, round_depth),
        "frames": [
            {
                "frame_id": f.frame_id,
                "rmse": f.rmse,
                "valid_pixels": f.valid_pixels,
            }
            for f in result.per_frame
        ],
    }


def _depth_eval_from_doc(doc):
    return DepthEvalResult(
        per_frame=tuple(
            FrameRmse(
                frame_id=f["frame_id"], rmse=f["rmse"], valid_pixels=f["valid_pixels"]
            )
            for f in doc["frames"]
        ),
        mean_rmse=doc["mean_rmse"],
        units=doc["units"],
    )


def to_json(obj, round_percent=2, round_depth=4):
    """Serialize a report object to canonical JSON text."""
    if isinstance(obj, FrameReport):
        doc = _frame_report_doc(obj, round_percent, round_depth)
    elif isinstance(obj, MetricsSummary):
        doc = _metrics_doc(obj)
    elif isinstance(obj, DepthEvalResult):
        doc = _depth_eval_doc(obj, round_depth)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def parse_report(text):
    """Parse canonical JSON back into the matching report object."""
    doc = json.loads(text)
    schema = doc.get("schema")
    if schema == FRAME_REPORT_SCHEMA:
        return _frame_report_from_doc(doc)
    if schema == METRICS_SCHEMA:
        return _metrics_from_doc(doc)
    if schema == DEPTH_EVAL_SCHEMA:
        return _depth_eval_from_doc(doc)
    raise ValueError(f"unknown report schema {schema!r}")


def pothole_csv_rows(report):
    """One CSV row per pothole record."""
    for rec in report.potholes:
        stats = rec.depth_stats
        yield {
            "frame_id": report.frame_id,
            "pothole_id": rec.id,
            "pixel_area": rec.pixel_area,
            "contour_area": rec.contour_area,
            "bbox_x_min": rec.bbox[0],
            "bbox_y_min": rec.bbox[1],
            "bbox_x_max": rec.bbox[2],
            "bbox_y_max": rec.bbox[3],
            "centroid_x": rec.centroid[0],
            "centroid_y": rec.centroid[1],
            "p_d": "" if stats is None else stats.p_d,
            "s_d": "" if stats is None else stats.s_d,
            "rp_d_difference": "" if rec.rp_d_difference is None else rec.rp_d_difference,
            "rp_d_ratio": "" if rec.rp_d_ratio is None else rec.rp_d_ratio,
            "severity": rec.severity,
            "depth_warning": rec.depth_warning or "",
        }


POTHOLE_CSV_FIELDS = (
    "frame_id",
    "pothole_id",
    "pixel_area",
    "contour_area",
    "bbox_x_min",
    "bbox_y_min",
    "bbox_x_max",
    "bbox_y_max",
    "centroid_x",
    "centroid_y",
    "p_d",
    "s_d",
    "rp_d_difference",
    "rp_d_ratio",
    "severity",
    "depth_warning",
)


def write_potholes_csv(path, reports):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=POTHOLE_CSV_FIELDS)
        writer.writeheader()
        for report in reports:
            for row in pothole_csv_rows(report):
                writer.writerow(row)


def curves_csv_text(kind_summary):
    """Confidence-sweep samples as CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["threshold", "precision", "recall", "f1"])
    cc = kind_summary.confidence_curves
    for t, p, r, f1 in zip(cc.thresholds, cc.precision, cc.recall, cc.f1):
        writer.writerow([t, p, r, f1])
    return buf.getvalue()


def pr_csv_text(kind_summary):
    """Interpolated precision-recall samples as CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["recall", "precision"])
    pr = kind_summary.pr_curve
    for r, p in zip(pr.grid_recall, pr.grid_precision):
        writer.writerow([r, p])
    return buf.getvalue()
