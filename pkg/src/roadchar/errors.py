"""Exception types raised across the package."""


class RoadcharError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(RoadcharError):
    """Two rasters that must share dimensions do not."""


class DegeneratePolygon(RoadcharError):
    """Polygon has fewer than 3 distinct vertices after denormalization."""


class EmptyComponent(RoadcharError):
    """Contour tracing was asked to trace a mask with no set pixels."""


class InsufficientDepthCoverage(RoadcharError):
    """Too few valid depth samples in a region to trust its mean.

    Attributes:
        region: "pothole" or "band".
        fraction: valid fraction that was observed.
        minimum: the configured minimum.
    """

    def __init__(self, region, fraction, minimum):
        self.region = region
        self.fraction = fraction
        self.minimum = minimum
        super().__init__(
            f"{region} region has valid depth fraction {fraction:.4f} "
            f"< required {minimum:.4f}"
        )


class ZeroSurroundDepth(RoadcharError):
    """Ratio-mode relative depth is undefined when the band mean is zero."""


class NoValidPixels(RoadcharError):
    """Ground-truth depth map contains no valid (nonzero) pixels."""


class MissingCounterpart(RoadcharError):
    """Prediction/ground-truth directories do not contain matching frame ids.

    Attributes:
        missing_pred: ids present in ground truth but not predictions.
        missing_gt: ids present in predictions but not ground truth.
    """

    def __init__(self, missing_pred=(), missing_gt=()):
        self.missing_pred = tuple(missing_pred)
        self.missing_gt = tuple(missing_gt)
        parts = []
        if self.missing_pred:
            parts.append(f"no prediction for: {', '.join(self.missing_pred)}")
        if self.missing_gt:
            parts.append(f"no ground truth for: {', '.join(self.missing_gt)}")
        super().__init__("; ".join(parts) or "id sets do not align")


class MalformedLine(RoadcharError):
    """An annotation line failed strict validation.

    Attributes:
        line_no: 1-based line number within the file (0 if unknown).
        field: 0-based index of the offending whitespace-separated field,
            or -1 when the problem is the line as a whole.
        reason: human-readable description.
    """

    def __init__(self, reason, line_no=0, field=-1):
        self.line_no = line_no
        self.field = field
        self.reason = reason
        where = f"line {line_no}" if line_no else "line"
        if field >= 0:
            where += f", field {field}"
        super().__init__(f"{where}: {reason}")


class OutOfRangeCoordinate(MalformedLine):
    """An annotation coordinate or confidence fell outside [0, 1]."""


class InsufficientData(RoadcharError):
    """Not enough distinct originals to carve out the requested test set."""


class PrimitiveOutOfBounds(RoadcharError):
    """A synthetic scene primitive does not fit inside the frame."""
