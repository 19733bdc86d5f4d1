"""Synthetic scenes with analytically known ground truth.

Every scene is built from flat-plane depth plus bowl primitives (ellipses
or polygons) whose geometry and depth are exactly known, so every
quantity the pipeline recovers has an expected value. Expected values are
computed here by deliberately independent brute force - a second border
tracer, a second point-in-polygon rasterizer, an integer-arithmetic band
- sharing no code with the modules under test.

Noise and missing-pixel speckle are applied only after expected values
are captured, so noisy comparisons carry statistical tolerances while
noiseless ones are exact. Depth constants in randomly generated scenes
are dyadic rationals (k/64) so region means are exact in float64.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import Config
from .characterize import frame_report
from .errors import PrimitiveOutOfBounds
from .raster import BinaryMask, DepthMap, Polygon, RasterImage, extract_instances

_BACKGROUND_GRAY = 96
_POTHOLE_GRAY = 64
_ELLIPSE_VERTICES = 64


@dataclass(frozen=True)
class EllipsePrimitive:
    """Elliptical pothole: center and semi-axes in pixels, depth offset
    (normalized) added to the plane depth inside the ellipse."""

    cx: float
    cy: float
    a: float
    b: float
    depth_offset: float


@dataclass(frozen=True)
class PolygonPrimitive:
    """Polygonal pothole with the same depth-offset semantics."""

    polygon: Polygon
    depth_offset: float


@dataclass(frozen=True)
class SceneSpec:
    """Declarative scene description.

    noise_sigma adds Gaussian noise to the depth field; missing_speckle
    blanks that fraction of depth pixels. Both are applied after the
    expected values are captured.
    """

    plane_depth: float
    primitives: tuple
    noise_sigma: float = 0.0
    missing_speckle: float = 0.0


@dataclass(frozen=True)
class ExpectedInstance:
    """Brute-force ground truth for one primitive."""

    pixel_area: int
    contour_area: float
    bbox: tuple
    p_d: float
    s_d: float
    rp_d_difference: float
    rp_d_ratio: float


@dataclass(frozen=True)
class ExpectedValues:
    instances: tuple
    total_contour_area: float
    damage_percent: float
    band_radius: int
    plane_depth: float


@dataclass(frozen=True)
class SyntheticScene:
    frame_id: str
    spec: SceneSpec
    seed: int
    width: int
    height: int
    rgb: RasterImage
    depth_field: np.ndarray  # normalized, NaN where speckled out
    depth_map: DepthMap  # millimeter rendering of the field
    masks: tuple  # per-primitive BinaryMask
    all_mask: BinaryMask
    annotations: tuple  # per-primitive normalized Polygon
    expected: ExpectedValues

    def frame_pair(self):
        """The scene as a dataset FramePair (RGB + millimeter depth)."""
        from .dataset import FramePair

        return FramePair(
            rgb=self.rgb,
            depth=self.depth_map,
            source_id=self.frame_id,
            family_id=self.frame_id,
        )


@dataclass(frozen=True)
class RoundTripDiagnostics:
    passed: bool
    checks: int
    failures: tuple


# ---------------------------------------------------------------------------
# Independent brute-force machinery (no shared code with raster/characterize)
# ---------------------------------------------------------------------------

# chain-code directions, clockwise on screen starting East: (dx, dy), y down
_CHAIN = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


def brute_trace_area(mask_data):
    """Shoelace area of the Moore boundary, via chain-code following.

    Independent re-implementation used as the oracle for traced contour
    areas: walks the outer border by arrival direction rather than by
    backtrack cell.
    """
    ys, xs = np.nonzero(mask_data)
    if ys.size == 0:
        raise ValueError("empty mask")
    h, w = mask_data.shape
    y0 = int(ys.min())
    x0 = int(xs[ys == y0].min())
    start = (x0, y0)

    def lit(x, y):
        return 0 <= x < w and 0 <= y < h and bool(mask_data[y, x])

    path = [start]
    cur = start
    direction = 7  # virtual NE arrival puts the first probe at NW of start
    seen = set()
    while True:
        found = None
        for k in range(8):
            nd = (direction + 6 + k) % 8
            dx, dy = _CHAIN[nd]
            cand = (cur[0] + dx, cur[1] + dy)
            if lit(*cand):
                found = (cand, nd)
                break
        if found is None:
            break
        state = found
        if state in seen:
            break
        seen.add(state)
        path.append(found[0])
        cur, direction = found
        if len(path) > 4 * ys.size + 8:  # pragma: no cover - defensive
            raise RuntimeError("oracle tracer failed to close")
    if len(path) > 1 and path[-1] == path[0]:
        path.pop()

    area2 = 0
    n = len(path)
    for i in range(n):
        xa, ya = path[i]
        xb, yb = path[(i + 1) % n]
        area2 += xa * yb - xb * ya
    return abs(area2) / 2.0


def brute_band(instance_data, all_data, radius):
    """Euclidean band by integer squared-distance comparison.

    Exact per-pixel minimum distance to the instance, compared as
    d^2 <= radius^2 in integers, so there is no float boundary ambiguity
    to disagree with the distance-transform implementation about.
    """
    ys, xs = np.nonzero(instance_data)
    h, w = instance_data.shape
    out = np.zeros((h, w), dtype=bool)
    if ys.size == 0:
        return out
    reach = int(math.ceil(radius)) + 1
    r0 = max(int(ys.min()) - reach, 0)
    r1 = min(int(ys.max()) + reach, h - 1)
    c0 = max(int(xs.min()) - reach, 0)
    c1 = min(int(xs.max()) + reach, w - 1)
    rr = np.arange(r0, r1 + 1, dtype=np.int64)
    cc = np.arange(c0, c1 + 1, dtype=np.int64)
    dy2 = (rr[:, None] - ys.astype(np.int64)) ** 2  # (R, n)
    dx2 = (cc[:, None] - xs.astype(np.int64)) ** 2  # (C, n)
    limit = float(radius) ** 2
    for i, r in enumerate(rr):
        d2 = dy2[i][None, :] + dx2  # (C, n)
        out[r, c0 : c1 + 1] = d2.min(axis=1) <= limit
    out &= ~all_data
    out &= ~instance_data
    return out


def brute_masked_mean(field, region_data):
    """Mean of valid field values over a region, via math.fsum."""
    vals = [float(v) for v in field[region_data] if not math.isnan(v)]
    if not vals:
        raise ValueError("region has no valid samples")
    return math.fsum(vals) / len(vals)


def _scanline_rasterize(pts_px, width, height):
    """Even-odd scanline rasterizer with the same top/left boundary rule
    as the production rasterizer, implemented independently."""
    out = np.zeros((height, width), dtype=bool)
    n = pts_px.shape[0]
    for r in range(height):
        y = r + 0.5
        crossings = []
        for i in range(n):
            xa, ya = pts_px[i]
            xb, yb = pts_px[(i + 1) % n]
            if (ya > y) != (yb > y):
                crossings.append((xb - xa) * (y - ya) / (yb - ya) + xa)
        if not crossings:
            continue
        crossings = np.sort(np.asarray(crossings))
        centers = np.arange(width) + 0.5
        greater = crossings.size - np.searchsorted(crossings, centers, side="right")
        out[r] = (greater % 2) == 1
    return out


def _dilate8(data):
    h, w = data.shape
    out = np.zeros((h + 2, w + 2), dtype=bool)
    for dr in (0, 1, 2):
        for dc in (0, 1, 2):
            out[dr : dr + h, dc : dc + w] |= data
    return out[1 : 1 + h, 1 : 1 + w]


# ---------------------------------------------------------------------------
# Scene construction
# ---------------------------------------------------------------------------


def _primitive_mask(prim, width, height):
    if isinstance(prim, EllipsePrimitive):
        if prim.a <= 0 or prim.b <= 0:
            raise PrimitiveOutOfBounds("ellipse semi-axes must be positive")
        if (
            prim.cx - prim.a < 0
            or prim.cx + prim.a > width
            or prim.cy - prim.b < 0
            or prim.cy + prim.b > height
        ):
            raise PrimitiveOutOfBounds(
                f"ellipse at ({prim.cx}, {prim.cy}) exceeds {width}x{height}"
            )
        cx = np.arange(width) + 0.5
        cy = np.arange(height) + 0.5
        nx = (cx[None, :] - prim.cx) / prim.a
        ny = (cy[:, None] - prim.cy) / prim.b
        return nx * nx + ny * ny <= 1.0
    if isinstance(prim, PolygonPrimitive):
        pts = prim.polygon.to_pixels(width, height)
        return _scanline_rasterize(pts, width, height)
    raise TypeError(f"unknown primitive {type(prim).__name__}")


def _primitive_polygon(prim, width, height):
    if isinstance(prim, PolygonPrimitive):
        return prim.polygon
    t = np.linspace(0.0, 2.0 * np.pi, _ELLIPSE_VERTICES, endpoint=False)
    xs = (prim.cx + prim.a * np.cos(t)) / width
    ys = (prim.cy + prim.b * np.sin(t)) / height
    return Polygon(np.clip(np.stack([xs, ys], axis=1), 0.0, 1.0))


def generate(spec, width, height, seed=0, band_radius=15, depth_range_mm=4500.0,
             frame_id="scene"):
    """Build a SyntheticScene and capture its expected values.

    Primitives must stay inside the frame and keep at least one pixel of
    separation so each remains its own connected component.

    Raises:
        PrimitiveOutOfBounds: a primitive does not fit the frame.
    """
    if not 0.0 <= spec.plane_depth <= 1.0:
        raise ValueError("plane_depth must lie in [0, 1]")
    masks = []
    for prim in spec.primitives:
        if not 0.0 <= spec.plane_depth + prim.depth_offset <= 1.0:
            raise ValueError("plane + offset must stay within [0, 1]")
        data = _primitive_mask(prim, width, height)
        if not data.any():
            raise PrimitiveOutOfBounds("primitive rasterizes to nothing")
        masks.append(data)
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if (_dilate8(masks[i]) & masks[j]).any():
                raise ValueError(f"primitives {i} and {j} touch or overlap")

    field = np.full((height, width), spec.plane_depth, dtype=np.float64)
    for prim, data in zip(spec.primitives, masks):
        field[data] = spec.plane_depth + prim.depth_offset

    all_data = np.zeros((height, width), dtype=bool)
    for data in masks:
        all_data |= data

    # expected values from the noiseless field, geometric bbox order
    order = sorted(
        range(len(masks)),
        key=lambda i: (
            int(np.nonzero(masks[i])[0].min()),
            int(np.nonzero(masks[i])[1].min()),
        ),
    )
    expected = []
    total_area = 0.0
    for i in order:
        data = masks[i]
        ys, xs = np.nonzero(data)
        bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
        contour_area = brute_trace_area(data)
        band = brute_band(data, all_data, band_radius)
        p_d = brute_masked_mean(field, data)
        s_d = brute_masked_mean(field, band)
        expected.append(
            ExpectedInstance(
                pixel_area=int(ys.size),
                contour_area=contour_area,
                bbox=bbox,
                p_d=p_d,
                s_d=s_d,
                rp_d_difference=(p_d - s_d) * 100.0,
                rp_d_ratio=(p_d - s_d) / s_d * 100.0,
            )
        )
        total_area += contour_area
    expected_values = ExpectedValues(
        instances=tuple(expected),
        total_contour_area=total_area,
        damage_percent=100.0 * total_area / (width * height),
        band_radius=band_radius,
        plane_depth=spec.plane_depth,
    )

    # noise and speckle go in only after expectations are frozen
    rng = np.random.default_rng(seed)
    if spec.noise_sigma > 0:
        field = np.clip(field + rng.normal(0.0, spec.noise_sigma, field.shape), 0.0, 1.0)
    if spec.missing_speckle > 0:
        n_blank = int(round(spec.missing_speckle * field.size))
        flat = rng.choice(field.size, size=n_blank, replace=False)
        field = field.copy()
        field.flat[flat] = np.nan

    mm = np.where(np.isnan(field), 0.0, np.rint(field * depth_range_mm))
    depth_map = DepthMap(mm.astype(np.uint16))

    rgb = np.full((height, width, 3), _BACKGROUND_GRAY, dtype=np.uint8)
    rgb[all_data] = _POTHOLE_GRAY

    return SyntheticScene(
        frame_id=frame_id,
        spec=spec,
        seed=seed,
        width=width,
        height=height,
        rgb=RasterImage(rgb),
        depth_field=field,
        depth_map=depth_map,
        masks=tuple(BinaryMask(m) for m in (masks[i] for i in order)),
        all_mask=BinaryMask(all_data),
        annotations=tuple(
            _primitive_polygon(spec.primitives[i], width, height) for i in order
        ),
        expected=expected_values,
    )


def random_scene_spec(rng, width, height, max_potholes=3, band_radius=15):
    """Random well-separated ellipse scene with dyadic depth constants."""
    plane = int(rng.integers(24, 45)) / 64.0
    count = int(rng.integers(1, max_potholes + 1))
    prims = []
    boxes = []
    for _ in range(count):
        for _attempt in range(200):
            a = int(rng.integers(4, 13))
            b = int(rng.integers(4, 13))
            margin = 2
            if 2 * (a + margin) >= width or 2 * (b + margin) >= height:
                continue
            cx = float(rng.uniform(a + margin, width - a - margin))
            cy = float(rng.uniform(b + margin, height - b - margin))
            box = (cx - a - 3, cy - b - 3, cx + a + 3, cy + b + 3)
            if any(
                box[0] < o[2] and o[0] < box[2] and box[1] < o[3] and o[1] < box[3]
                for o in boxes
            ):
                continue
            boxes.append(box)
            offset = int(rng.integers(6, 17)) / 64.0
            prims.append(EllipsePrimitive(cx=cx, cy=cy, a=a, b=b, depth_offset=offset))
            break
    if not prims:
        prims.append(
            EllipsePrimitive(
                cx=width / 2.0, cy=height / 2.0, a=4, b=4, depth_offset=0.125
            )
        )
    return SceneSpec(plane_depth=plane, primitives=tuple(prims))


def round_trip_check(scene, config=None, contour_tol=1e-9, identity_tol=1e-9):
    """Run the real pipeline over a scene and compare against expectations.

    Pixel areas must match exactly; contour areas within contour_tol of
    the independent tracer; region means exactly on noiseless scenes and
    within 3*sigma/sqrt(n) under noise; the two relative-depth modes must
    satisfy ratio == difference / s_d.
    """
    cfg = config or Config(band_radius=scene.expected.band_radius)
    instances = extract_instances(scene.all_mask, cfg.connectivity)
    report = frame_report(
        scene.frame_id,
        instances,
        scene.width * scene.height,
        depth_field=scene.depth_field,
        config=cfg,
    )
    failures = []
    checks = 0
    noiseless = scene.spec.noise_sigma == 0.0

    if len(report.potholes) != len(scene.expected.instances):
        return RoundTripDiagnostics(
            passed=False,
            checks=1,
            failures=(
                f"instance count {len(report.potholes)} != "
                f"{len(scene.expected.instances)}",
            ),
        )

    by_id = {rec.id: rec for rec in report.potholes}
    for idx, exp in enumerate(scene.expected.instances):
        rec = by_id[idx]
        checks += 1
        if rec.pixel_area != exp.pixel_area:
            failures.append(
                f"instance {idx}: pixel_area {rec.pixel_area} != {exp.pixel_area}"
            )
        checks += 1
        if abs(rec.contour_area - exp.contour_area) > contour_tol:
            failures.append(
                f"instance {idx}: contour_area {rec.contour_area!r} != "
                f"{exp.contour_area!r}"
            )
        checks += 1
        if rec.bbox != exp.bbox:
            failures.append(f"instance {idx}: bbox {rec.bbox} != {exp.bbox}")
        if rec.depth_stats is None:
            checks += 1
            failures.append(f"instance {idx}: no depth stats ({rec.depth_warning})")
            continue
        stats = rec.depth_stats
        if noiseless:
            checks += 2
            if stats.p_d != exp.p_d:
                failures.append(f"instance {idx}: p_d {stats.p_d!r} != {exp.p_d!r}")
            if stats.s_d != exp.s_d:
                failures.append(f"instance {idx}: s_d {stats.s_d!r} != {exp.s_d!r}")
        else:
            n_p = max(int(rec.pixel_area * stats.valid_pothole_fraction), 1)
            tol = 3.0 * scene.spec.noise_sigma / math.sqrt(n_p)
            checks += 2
            if abs(stats.p_d - exp.p_d) > tol:
                failures.append(
                    f"instance {idx}: p_d {stats.p_d} off {exp.p_d} by > {tol}"
                )
            if abs(stats.s_d - exp.s_d) > 3.0 * scene.spec.noise_sigma:
                failures.append(f"instance {idx}: s_d {stats.s_d} far from {exp.s_d}")
        checks += 1
        if stats.s_d > 0 and rec.rp_d_ratio is not None:
            implied = rec.rp_d_difference / stats.s_d
            if abs(rec.rp_d_ratio - implied) > identity_tol:
                failures.append(
                    f"instance {idx}: ratio {rec.rp_d_ratio} != diff/s_d {implied}"
                )

    checks += 1
    if noiseless and report.total_pothole_area != scene.expected.total_contour_area:
        if abs(report.total_pothole_area - scene.expected.total_contour_area) > contour_tol:
            failures.append(
                f"total area {report.total_pothole_area!r} != "
                f"{scene.expected.total_contour_area!r}"
            )
    return RoundTripDiagnostics(
        passed=not failures, checks=checks, failures=tuple(failures)
    )
