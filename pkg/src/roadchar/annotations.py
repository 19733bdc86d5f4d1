"""YOLO-seg style polygon annotation text format.

Ground-truth line:  ``class_id x1 y1 x2 y2 ... xn yn``  (n >= 3)
Prediction line:    same, plus a trailing confidence field.

All coordinates are normalized to [0, 1]. Validation is strict: a bad
line raises a positioned error instead of being silently dropped.
"""

import numpy as np

from .errors import MalformedLine, OutOfRangeCoordinate
from .metrics import Detection, GroundTruth
from .raster import Polygon


def _parse_float(token, line_no, field):
    try:
        return float(token)
    except ValueError:
        raise MalformedLine(f"not a number: {token!r}", line_no, field) from None


def parse_annotation(line, kind, frame_id="", line_no=1):
    """Parse one annotation line.

    Args:
        line: the raw text line.
        kind: "gt" or "pred"; predictions carry a trailing confidence.
        frame_id: recorded on the returned object.
        line_no: 1-based position for error reporting.

    Returns:
        GroundTruth for kind "gt", Detection for kind "pred".

    Raises:
        MalformedLine, OutOfRangeCoordinate.
    """
    if kind not in ("gt", "pred"):
        raise ValueError(f"kind must be 'gt' or 'pred', got {kind!r}")
    tokens = line.split()
    if not tokens:
        raise MalformedLine("empty line", line_no)
    try:
        class_id = int(tokens[0])
    except ValueError:
        raise MalformedLine(f"class id not an integer: {tokens[0]!r}", line_no, 0) from None
    if class_id < 0:
        raise MalformedLine(f"negative class id {class_id}", line_no, 0)

    rest = tokens[1:]
    confidence = None
    if kind == "pred":
        if len(rest) % 2 != 1:
            raise MalformedLine(
                "prediction needs an even-length polygon plus one confidence "
                f"field, got {len(rest)} values after the class id",
                line_no,
            )
        confidence = _parse_float(rest[-1], line_no, len(tokens) - 1)
        if not 0.0 <= confidence <= 1.0:
            raise OutOfRangeCoordinate(
                f"confidence {confidence} outside [0, 1]", line_no, len(tokens) - 1
            )
        rest = rest[:-1]
    else:
        if len(rest) % 2 != 0:
            raise MalformedLine(
                f"odd coordinate count {len(rest)}", line_no
            )
    if len(rest) < 6:
        raise MalformedLine(
            f"polygon needs at least 3 vertices, got {len(rest) // 2}", line_no
        )

    coords = []
    for i, token in enumerate(rest):
        value = _parse_float(token, line_no, i + 1)
        if not 0.0 <= value <= 1.0:
            raise OutOfRangeCoordinate(
                f"coordinate {value} outside [0, 1]", line_no, i + 1
            )
        coords.append(value)
    vertices = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
    polygon = Polygon(vertices)
    if kind == "gt":
        return GroundTruth(frame_id=frame_id, class_id=class_id, polygon=polygon)
    return Detection(
        frame_id=frame_id, class_id=class_id, polygon=polygon, confidence=confidence
    )


def format_annotation(obj):
    """Serialize a GroundTruth or Detection back to one text line."""
    parts = [str(obj.class_id)]
    parts.extend(repr(float(v)) for v in obj.polygon.vertices.ravel())
    if isinstance(obj, Detection):
        parts.append(repr(float(obj.confidence)))
    return " ".join(parts)


def parse_annotation_file(path, kind, frame_id=None):
    """Parse every non-blank line of a file; blank lines are skipped,
    malformed ones raise with their line number."""
    frame_id = frame_id if frame_id is not None else _stem(path)
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            out.append(parse_annotation(line, kind, frame_id, line_no))
    return out


def write_annotation_file(path, objs):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(format_annotation(obj) + "\n")


def _stem(path):
    import os

    return os.path.splitext(os.path.basename(str(path)))[0]
