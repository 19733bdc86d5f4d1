"""Overlay rendering: annotated RGB, colorized depth, and their blend.

Output is a side-by-side panel image: the RGB frame with instance
outlines and per-pothole labels, the depth map on a fixed perceptual
color ramp, and a merged view. Without depth only the first panel and a
mask-tint panel are produced. Everything is deterministic: fixed palette,
fixed ramp, PIL's built-in bitmap font.
"""

import numpy as np
from PIL import Image, ImageDraw

from .errors import DimensionMismatch
from .raster import RasterImage

# instance outline colors, cycled
_PALETTE = (
    (255, 64, 64),
    (64, 200, 255),
    (255, 200, 0),
    (96, 255, 96),
    (255, 96, 255),
    (255, 160, 64),
    (160, 160, 255),
    (0, 220, 180),
)

# piecewise-linear perceptual ramp (dark blue -> green -> yellow), pinned
_RAMP_ANCHORS = (
    (0.0, (68, 1, 84)),
    (0.14, (70, 50, 127)),
    (0.29, (54, 92, 141)),
    (0.43, (39, 127, 142)),
    (0.57, (31, 161, 135)),
    (0.71, (74, 194, 109)),
    (0.86, (159, 218, 58)),
    (1.0, (253, 231, 37)),
)

_MISSING_COLOR = (40, 40, 40)


def _ramp_lut():
    xs = np.array([a[0] for a in _RAMP_ANCHORS])
    cols = np.array([a[1] for a in _RAMP_ANCHORS], dtype=np.float64)
    t = np.linspace(0.0, 1.0, 256)
    lut = np.stack(
        [np.interp(t, xs, cols[:, c]) for c in range(3)], axis=1
    )
    return np.clip(np.rint(lut), 0, 255).astype(np.uint8)


_LUT = _ramp_lut()


def colorize_depth(depth_field):
    """Map a normalized depth field onto the fixed color ramp.

    NaN (missing) samples render dark gray.
    """
    idx = np.clip(np.nan_to_num(depth_field, nan=0.0) * 255.0, 0, 255).astype(np.uint8)
    out = _LUT[idx]
    out[np.isnan(depth_field)] = _MISSING_COLOR
    return out


def _draw_instances(img, instances, records, rpd_mode):
    draw = ImageDraw.Draw(img)
    by_id = {rec.id: rec for rec in records} if records else {}
    for inst in instances:
        color = _PALETTE[inst.id % len(_PALETTE)]
        if inst.contour is not None and len(inst.contour) >= 2:
            pts = [tuple(p) for p in inst.contour]
            draw.line(pts + [pts[0]], fill=color, width=1)
        else:
            x0, y0, x1, y1 = inst.bbox
            draw.rectangle([x0, y0, x1 + 1, y1 + 1], outline=color, width=1)
        rec = by_id.get(inst.id)
        label = f"#{inst.id} A={inst.contour_area:.1f}" if inst.contour_area is not None \
            else f"#{inst.id} A={inst.pixel_area}"
        if rec is not None:
            rp_d = rec.rp_d_ratio if rpd_mode == "ratio" else rec.rp_d_difference
            if rp_d is not None:
                label += f" RPd={rp_d:.2f}%"
        tx = min(max(inst.bbox[0], 1), img.width - 1)
        ty = max(inst.bbox[1] - 10, 1)
        draw.text((tx, ty), label, fill=color)
    return img


def render_overlay(rgb, depth_field, instances, records=(), rpd_mode="difference"):
    """Compose the overlay panels for one frame.

    Args:
        rgb: RasterImage (the frame).
        depth_field: normalized depth (NaN = missing) or None.
        instances: extracted instances with contours.
        records: matching PotholeRecords (for depth labels); optional.
        rpd_mode: which relative-depth value the labels show.

    Raises:
        DimensionMismatch: depth dims differ from the frame.
    """
    base = rgb.pixels if rgb.channels == 3 else np.stack([rgb.pixels] * 3, axis=-1)
    annotated = _draw_instances(
        Image.fromarray(base.copy()), instances, records, rpd_mode
    )

    if depth_field is not None:
        if depth_field.shape != base.shape[:2]:
            raise DimensionMismatch(
                f"depth {depth_field.shape} vs frame {base.shape[:2]}"
            )
        depth_panel = colorize_depth(depth_field)
        merged = np.clip(
            0.5 * base.astype(np.float64) + 0.5 * depth_panel.astype(np.float64),
            0,
            255,
        ).astype(np.uint8)
        merged_img = _draw_instances(
            Image.fromarray(merged), instances, records, rpd_mode
        )
        panels = [np.asarray(annotated), depth_panel, np.asarray(merged_img)]
    else:
        tint = base.copy()
        for inst in instances:
            color = _PALETTE[inst.id % len(_PALETTE)]
            region = inst.mask.data
            tint[region] = (
                0.5 * tint[region] + 0.5 * np.array(color, dtype=np.float64)
            ).astype(np.uint8)
        panels = [np.asarray(annotated), tint]

    return RasterImage(np.concatenate(panels, axis=1))
