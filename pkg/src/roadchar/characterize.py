"""Per-pothole and per-frame characterization.

Fuses extracted instances with a normalized depth field to produce the
quantities a maintenance report needs: pixel and contour areas, the frame
damage percentage, the mean depth of the pothole region (P_D) and of a
thin surrounding band (S_D), and the relative pothole depth (RP_D).

RP_D comes in two modes because the two published definitions disagree:

* ``ratio``:      (P_D - S_D) / S_D * 100
* ``difference``: (P_D - S_D) * 100

Every reported figure in the source material matches difference mode, so
that is the default; reports always carry both values.

Depth convention: larger normalized value = farther from the camera =
deeper pothole, so a detected pothole satisfies P_D > S_D.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .config import Config
from .errors import InsufficientDepthCoverage, ZeroSurroundDepth
from .raster import surrounding_band, union_mask


@dataclass(frozen=True)
class DepthStats:
    """Mean normalized depths of a pothole and its surrounding band.

    All values are unitless in [0, 1]; fractions report how much of each
    region carried a valid depth reading.
    """

    p_d: float
    s_d: float
    valid_pothole_fraction: float
    valid_band_fraction: float


@dataclass(frozen=True)
class PotholeRecord:
    """One characterized pothole.

    Scalar geometry is mirrored out of the instance so records serialize
    and compare without dragging the raster payload along; ``instance``
    keeps the full-resolution mask for rendering and is excluded from
    equality.
    """

    id: int
    pixel_area: int
    contour_area: float
    bbox: tuple
    centroid: tuple
    depth_stats: DepthStats | None = None
    rp_d_ratio: float | None = None
    rp_d_difference: float | None = None
    severity: float = 0.0
    depth_warning: str | None = None
    instance: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FrameReport:
    """Per-frame aggregation of pothole records.

    damage_percent is 100 * total_pothole_area / frame_area at full
    precision; display rounding happens at serialization time.
    """

    frame_id: str
    frame_area: float
    potholes: tuple
    total_pothole_area: float
    damage_percent: float


def normalize_depth(depth, max_range_mm=4500.0):
    """Map a millimeter DepthMap onto [0, 1] with NaN at missing samples.

    Valid samples map to clamp(mm / max_range_mm, 0, 1); missing samples
    (value 0) become NaN and are excluded from every downstream average.
    """
    if max_range_mm <= 0:
        raise ValueError("max_range_mm must be positive")
    out = np.clip(depth.data.astype(np.float64) / max_range_mm, 0.0, 1.0)
    out[depth.data == depth.missing_code] = np.nan
    return out


def _region_mean(field_values, region, name, min_valid_fraction):
    total = int(np.count_nonzero(region))
    if total == 0:
        raise InsufficientDepthCoverage(name, 0.0, min_valid_fraction)
    vals = field_values[region]
    valid = ~np.isnan(vals)
    fraction = float(np.count_nonzero(valid)) / total
    if fraction < min_valid_fraction:
        raise InsufficientDepthCoverage(name, fraction, min_valid_fraction)
    return float(np.mean(vals[valid])), fraction


def depth_stats(instance, all_potholes, depth_field, band_radius=15,
                min_valid_fraction=0.2):
    """Mean depth over an instance and over its surrounding band.

    Args:
        instance: Instance whose mask defines the pothole region.
        all_potholes: union mask of every pothole in the frame; excluded
            from the band so neighbors do not skew the surface estimate.
        depth_field: normalized depth (float array, NaN = missing).
        band_radius: Euclidean band radius in pixels.
        min_valid_fraction: below this valid-depth share in either region
            the verdict is untrustworthy and an error is raised.

    Raises:
        InsufficientDepthCoverage: names the failing region and fraction.
    """
    p_d, pothole_fraction = _region_mean(
        depth_field, instance.mask.data, "pothole", min_valid_fraction
    )
    band = surrounding_band(instance.mask, all_potholes, band_radius)
    s_d, band_fraction = _region_mean(
        depth_field, band.data, "band", min_valid_fraction
    )
    return DepthStats(
        p_d=p_d,
        s_d=s_d,
        valid_pothole_fraction=pothole_fraction,
        valid_band_fraction=band_fraction,
    )


def relative_depth(p_d, s_d, mode="difference"):
    """Relative pothole depth in percent.

    ``difference`` returns (p_d - s_d) * 100, the arithmetic behind every
    published figure; ``ratio`` returns (p_d - s_d) / s_d * 100.

    Raises:
        ZeroSurroundDepth: ratio mode with s_d == 0.
    """
    if mode == "difference":
        return (p_d - s_d) * 100.0
    if mode == "ratio":
        if s_d == 0:
            raise ZeroSurroundDepth("band mean depth is zero")
        return (p_d - s_d) / s_d * 100.0
    raise ValueError(f"unknown relative-depth mode {mode!r}")


def severity(record):
    """Ordering score: contour area times positive depth difference.

    Used only to rank potholes within a frame; never reported as a
    physical quantity. Records without depth information score 0.
    """
    if record.rp_d_difference is None:
        return 0.0
    return record.contour_area * max(record.rp_d_difference, 0.0)


def damage_percent(contour_areas, frame_area):
    """Percentage of the frame covered by pothole contour areas."""
    if frame_area <= 0:
        raise ValueError("frame_area must be positive")
    return 100.0 * float(sum(contour_areas)) / frame_area


def frame_report(frame_id, instances, frame_area, depth_field=None, config=None):
    """Characterize every instance in a frame and aggregate.

    Args:
        frame_id: identifier recorded in the report.
        instances: extracted instances (contours are traced on demand).
        frame_area: frame area in square pixels.
        depth_field: normalized depth (NaN = missing) or None; without it
            the report carries geometry only.
        config: Config with band radius and thresholds; defaults apply
            when None.

    A region with insufficient depth coverage downgrades to a per-record
    warning rather than failing the frame.
    """
    cfg = config or Config()
    instances = [inst.with_contour() for inst in instances]
    frame_mask = None
    if depth_field is not None and instances:
        frame_mask = union_mask([inst.mask for inst in instances])

    records = []
    for inst in instances:
        stats = None
        ratio = None
        diff = None
        warning = None
        if depth_field is not None:
            try:
                stats = depth_stats(
                    inst,
                    frame_mask,
                    depth_field,
                    band_radius=cfg.band_radius,
                    min_valid_fraction=cfg.min_valid_fraction,
                )
            except InsufficientDepthCoverage as exc:
                warning = str(exc)
            if stats is not None:
                diff = relative_depth(stats.p_d, stats.s_d, "difference")
                try:
                    ratio = relative_depth(stats.p_d, stats.s_d, "ratio")
                except ZeroSurroundDepth:
                    warning = "band mean depth is zero; ratio-mode RP_D undefined"
        record = PotholeRecord(
            id=inst.id,
            pixel_area=inst.pixel_area,
            contour_area=inst.contour_area,
            bbox=inst.bbox,
            centroid=inst.centroid,
            depth_stats=stats,
            rp_d_ratio=ratio,
            rp_d_difference=diff,
            depth_warning=warning,
            instance=inst,
        )
        records.append(replace(record, severity=severity(record)))

    records.sort(key=lambda r: (-r.severity, r.id))
    total = float(sum(r.contour_area for r in records))
    return FrameReport(
        frame_id=frame_id,
        frame_area=float(frame_area),
        potholes=tuple(records),
        total_pothole_area=total,
        damage_percent=damage_percent([total], frame_area),
    )
