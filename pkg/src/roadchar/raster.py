"""Raster and geometry primitives: images, depth maps, masks, polygons.

Conventions used throughout the package:

* Arrays are row-major with shape (height, width[, channels]); a pixel is
  addressed as (row, col) but exposed coordinates are (x, y) = (col, row).
* The center of pixel (row r, col c) sits at (x, y) = (c + 0.5, r + 0.5).
* Depth sample value 0 means "no reading" and is never interpolated.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import DegeneratePolygon, DimensionMismatch, EmptyComponent

MISSING_DEPTH = 0

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


def _freeze(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RasterImage:
    """8-bit image, single channel or RGB.

    Attributes:
        pixels: uint8 array of shape (height, width) or (height, width, 3).
    """

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.uint8)
        if p.ndim == 2:
            pass
        elif p.ndim == 3 and p.shape[2] == 3:
            pass
        else:
            raise ValueError(f"expected (h, w) or (h, w, 3) pixels, got {p.shape}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        object.__setattr__(self, "pixels", _freeze(p))

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.all(self.pixels == other.pixels)
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return 1 if self.pixels.ndim == 2 else 3


@dataclass(frozen=True)
class DepthMap:
    """16-bit depth raster in millimeters; sample value 0 means missing.

    Attributes:
        data: uint16 array of shape (height, width).
    """

    data: np.ndarray
    missing_code: int = MISSING_DEPTH

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.uint16)
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError(f"expected 2-D depth samples, got shape {d.shape}")
        if self.missing_code != MISSING_DEPTH:
            raise ValueError("missing depth code is fixed at 0")
        object.__setattr__(self, "data", _freeze(d))

    def __eq__(self, other):
        if not isinstance(other, DepthMap):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.all(self.data == other.data)
        )

    def __hash__(self):
        return hash((self.data.shape, self.data.tobytes()))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def valid_fraction(self):
        """Fraction of samples that carry a reading (value != 0)."""
        return float(np.count_nonzero(self.data)) / self.data.size

    def zero_fraction(self):
        return 1.0 - self.valid_fraction()


@dataclass(frozen=True)
class BinaryMask:
    """Boolean occupancy raster.

    Attributes:
        data: bool array of shape (height, width).
    """

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=bool)
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError(f"expected 2-D mask, got shape {d.shape}")
        object.__setattr__(self, "data", _freeze(d))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.all(self.data == other.data)
        )

    def __hash__(self):
        return hash((self.data.shape, self.data.tobytes()))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def pixel_count(self):
        return int(np.count_nonzero(self.data))

    def same_shape(self, other):
        return self.data.shape == other.data.shape


@dataclass(frozen=True)
class Polygon:
    """Closed polygon in normalized [0, 1] image coordinates.

    Vertex order defines orientation; the polygon is implicitly closed
    (last vertex connects back to the first).
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError(f"expected (n, 2) vertices, got shape {v.shape}")
        if v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("normalized coordinates must lie in [0, 1]")
        object.__setattr__(self, "vertices", _freeze(v))

    def __eq__(self, other):
        if not isinstance(other, Polygon):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.all(self.vertices == other.vertices)
        )

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def to_pixels(self, width, height):
        """Scale normalized vertices into pixel coordinates."""
        return self.vertices * np.array([width, height], dtype=np.float64)

    def bounds(self):
        """Normalized extent (x_min, y_min, x_max, y_max)."""
        v = self.vertices
        return (
            float(v[:, 0].min()),
            float(v[:, 1].min()),
            float(v[:, 0].max()),
            float(v[:, 1].max()),
        )


@dataclass(frozen=True)
class Instance:
    """One connected pothole region extracted from a frame mask.

    Attributes:
        id: ordinal within the frame after geometric sorting.
        mask: full-frame occupancy of this instance only.
        pixel_area: number of set pixels.
        bbox: inclusive pixel-index bounds (x_min, y_min, x_max, y_max).
        centroid: mean of set pixel centers, (x, y).
        contour: traced outer boundary through pixel centers as an (k, 2)
            float array of (x, y), or None if not yet traced.
        contour_area: shoelace area of the traced boundary (square pixels).
    """

    id: int
    mask: BinaryMask
    pixel_area: int
    bbox: tuple
    centroid: tuple
    contour: np.ndarray | None = field(default=None, compare=False)
    contour_area: float | None = None

    def with_contour(self):
        """Return a copy with contour and contour_area filled in."""
        if self.contour_area is not None:
            return self
        contour, area = trace_contour(self.mask)
        return replace(self, contour=_freeze(contour), contour_area=area)


def rasterize_polygon(poly, width, height):
    """Rasterize a normalized polygon onto a (height, width) grid.

    A pixel is set iff its center lies inside the polygon under the
    even-odd rule. Centers exactly on a boundary follow the top/left
    convention: left and top edges are covered, right and bottom are not,
    so adjacent polygons partition the grid cleanly.

    Raises:
        DegeneratePolygon: fewer than 3 distinct vertices after scaling.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be positive")
    pts = poly.to_pixels(width, height)
    if np.unique(pts, axis=0).shape[0] < 3:
        raise DegeneratePolygon(f"only {np.unique(pts, axis=0).shape[0]} distinct vertices")

    out = np.zeros((height, width), dtype=bool)
    xs, ys = pts[:, 0], pts[:, 1]
    c0 = max(int(np.floor(xs.min() - 1.0)), 0)
    c1 = min(int(np.ceil(xs.max() + 1.0)), width - 1)
    r0 = max(int(np.floor(ys.min() - 1.0)), 0)
    r1 = min(int(np.ceil(ys.max() + 1.0)), height - 1)
    if c0 > c1 or r0 > r1:
        return BinaryMask(out)

    cx = np.arange(c0, c1 + 1, dtype=np.float64) + 0.5
    cy = np.arange(r0, r1 + 1, dtype=np.float64) + 0.5
    gx = cx[np.newaxis, :]
    gy = cy[:, np.newaxis]
    inside = np.zeros((cy.size, cx.size), dtype=bool)

    n = pts.shape[0]
    for i in range(n):
        xa, ya = pts[i]
        xb, yb = pts[(i + 1) % n]
        if ya == yb:
            continue
        crosses = (ya > gy) != (yb > gy)
        # x of edge at scanline gy; evaluated only where the edge spans gy
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (xb - xa) * (gy - ya) / (yb - ya) + xa
        inside ^= crosses & (gx < xint)

    out[r0 : r1 + 1, c0 : c1 + 1] = inside
    return BinaryMask(out)


def connected_components(mask, connectivity=8):
    """Split a mask into connected instances.

    Args:
        mask: BinaryMask to split.
        connectivity: 4 or 8 (default 8, so diagonally touching pixels
            stay in one pothole).

    Returns:
        List of Instance (mask, pixel_area, bbox, centroid; contour not
        traced), ordered by bbox (y_min, x_min). Empty mask gives [].
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    structure = _STRUCTURE_8 if connectivity == 8 else _STRUCTURE_4
    labels, count = ndimage.label(mask.data, structure=structure)
    if count == 0:
        return []

    items = []
    slices = ndimage.find_objects(labels)
    for lab, sl in enumerate(slices, start=1):
        rows, cols = sl
        local = labels[sl] == lab
        full = np.zeros_like(mask.data)
        full[sl] = local
        area = int(np.count_nonzero(local))
        rr, cc = np.nonzero(local)
        bbox = (
            int(cols.start + cc.min()),
            int(rows.start + rr.min()),
            int(cols.start + cc.max()),
            int(rows.start + rr.max()),
        )
        centroid = (
            float(cols.start + cc.mean() + 0.5),
            float(rows.start + rr.mean() + 0.5),
        )
        items.append((bbox, BinaryMask(full), area, centroid))

    items.sort(key=lambda it: (it[0][1], it[0][0], it[0][3], it[0][2]))
    return [
        Instance(id=i, mask=m, pixel_area=a, bbox=b, centroid=c)
        for i, (b, m, a, c) in enumerate(items)
    ]


# Moore neighborhood scanned clockwise on screen (y grows downward),
# starting west: W, NW, N, NE, E, SE, S, SW as (dr, dc).
_MOORE = (
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
)
_MOORE_INDEX = {off: i for i, off in enumerate(_MOORE)}


def trace_contour(mask):
    """Trace the outer boundary of one connected component.

    Moore border following through pixel centers. The caller guarantees
    the mask holds a single connected component; tracing starts at its
    topmost-leftmost pixel.

    Returns:
        (contour, area): contour is a (k, 2) float array of (x, y) pixel
        centers forming a closed loop (single-pixel component gives a
        degenerate 1-vertex loop); area is the absolute shoelace area of
        that vertex sequence, always strictly below the pixel count.

    Raises:
        EmptyComponent: no set pixels.
    """
    data = mask.data
    rows, cols = np.nonzero(data)
    if rows.size == 0:
        raise EmptyComponent("cannot trace an empty mask")
    h, w = data.shape

    r0 = int(rows.min())
    c0 = int(cols[rows == r0].min())
    start = (r0, c0)

    def is_set(p):
        return 0 <= p[0] < h and 0 <= p[1] < w and data[p]

    path = [start]
    cur = start
    back = (r0, c0 - 1)  # west of start; outside the component by construction
    seen_states = set()
    limit = 4 * rows.size + 8

    while True:
        base = _MOORE_INDEX[(back[0] - cur[0], back[1] - cur[1])]
        found = None
        prev = back
        for k in range(1, 9):
            off = _MOORE[(base + k) % 8]
            cand = (cur[0] + off[0], cur[1] + off[1])
            if is_set(cand):
                found = cand
                break
            prev = cand
        if found is None:
            break  # isolated pixel
        state = (found, prev)
        if state in seen_states:
            break
        seen_states.add(state)
        path.append(found)
        cur, back = found, prev
        if len(path) > limit:  # pragma: no cover - defensive
            raise RuntimeError("contour tracing failed to close")

    if len(path) > 1 and path[-1] == path[0]:
        path.pop()

    contour = np.array(
        [(c + 0.5, r + 0.5) for r, c in path], dtype=np.float64
    ).reshape(-1, 2)
    return contour, shoelace_area(contour)


def shoelace_area(vertices):
    """Absolute shoelace area of a closed vertex loop; < 3 vertices give 0."""
    v = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
    if v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return float(
        0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    )


def surrounding_band(instance_mask, all_potholes, radius):
    """Pixels within Euclidean `radius` of an instance, minus all potholes.

    The band is a thin annulus used to sample the road surface around a
    pothole; every pothole pixel in the frame is excluded so two nearby
    potholes never contaminate each other's surroundings.

    Args:
        instance_mask: the instance to surround.
        all_potholes: union of every pothole instance in the frame.
        radius: Euclidean distance in pixels, >= 1.

    Raises:
        DimensionMismatch: masks differ in shape.
    """
    if not instance_mask.same_shape(all_potholes):
        raise DimensionMismatch(
            f"instance {instance_mask.data.shape} vs all-potholes "
            f"{all_potholes.data.shape}"
        )
    if radius < 1:
        raise ValueError("band radius must be >= 1 pixel")
    if not instance_mask.data.any():
        return BinaryMask(np.zeros_like(instance_mask.data))
    dist = ndimage.distance_transform_edt(~instance_mask.data)
    band = (dist <= radius) & ~all_potholes.data & ~instance_mask.data
    return BinaryMask(band)


def extract_instances(mask, connectivity=8):
    """Connected components with contours traced; the usual entry point."""
    return [inst.with_contour() for inst in connected_components(mask, connectivity)]


def union_mask(masks, width=None, height=None):
    """OR a sequence of BinaryMasks together."""
    masks = list(masks)
    if not masks:
        if width is None or height is None:
            raise ValueError("empty union needs explicit dimensions")
        return BinaryMask(np.zeros((height, width), dtype=bool))
    acc = np.zeros_like(masks[0].data)
    for m in masks:
        if m.data.shape != acc.shape:
            raise DimensionMismatch("masks in union differ in shape")
        acc |= m.data
    return BinaryMask(acc)


def mirror_horizontal_mask(mask):
    """Mirror a mask left-to-right (used by augmentation consistency checks)."""
    return BinaryMask(mask.data[:, ::-1].copy())
