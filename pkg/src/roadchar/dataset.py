"""Dataset preparation: cleaning, augmentation, resizing, splitting.

RGB frames and their depth maps travel together as FramePairs. Cleaning
drops pairs whose depth scan is (almost) entirely empty. Each surviving
original spawns exactly four augmented variants; geometric transforms are
applied to RGB and depth alike, photometric ones to RGB only, and depth
samples are never blended across the missing/valid boundary (nearest
neighbor everywhere, missing regions stay missing).

All randomness is driven by a per-pair seed derived as a stable hash of
(master seed, source id), so a dataset rebuild is byte-identical.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import InsufficientData
from .raster import DepthMap, RasterImage

AUGMENT_KINDS = ("saturation", "mirror", "saturation_mirror", "random")

SATURATION_FACTOR = 1.5
RANDOM_BRIGHTNESS = 0.25
RANDOM_CONTRAST = 0.25
RANDOM_ROTATION_DEG = 15.0
RANDOM_SATURATION = 0.30

# ITU-R 601-2 luma weights, the usual RGB -> gray transform
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class Provenance:
    """How a pair came to be: "original" or one of AUGMENT_KINDS."""

    kind: str = "original"
    seed: int | None = None


@dataclass(frozen=True)
class FramePair:
    """An RGB frame and its depth map, tracked back to one original.

    family_id names the original the pair derives from; originals are
    their own family. Splits never separate a family.
    """

    rgb: RasterImage
    depth: DepthMap
    source_id: str
    family_id: str
    provenance: Provenance = Provenance()

    def __post_init__(self):
        if not self.source_id:
            raise ValueError("source_id must be non-empty")
        if self.rgb.channels != 3:
            raise ValueError("FramePair RGB must be 3-channel")


@dataclass(frozen=True)
class SplitManifest:
    """Train/test partition at pair granularity, family-atomic."""

    train_ids: tuple
    test_ids: tuple
    seed: int

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise ValueError(f"ids in both partitions: {sorted(overlap)}")


def derive_seed(master_seed, source_id):
    """Stable 64-bit per-pair seed; independent of process hash salt."""
    digest = hashlib.blake2s(
        f"{master_seed}/{source_id}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def clean(pairs, zero_fraction_threshold=1.0):
    """Drop pairs whose depth zero-fraction reaches the threshold.

    The default 1.0 removes exactly the all-black depth scans (sensor not
    ready yet); lower thresholds also remove mostly-empty scans. Order is
    preserved.
    """
    if not 0.0 < zero_fraction_threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    return [
        p for p in pairs if p.depth.zero_fraction() < zero_fraction_threshold
    ]


def _scale_saturation(rgb, factor):
    arr = rgb.astype(np.float64)
    gray = arr @ _LUMA
    out = gray[..., np.newaxis] + factor * (arr - gray[..., np.newaxis])
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _adjust_brightness(rgb, delta):
    out = rgb.astype(np.float64) * (1.0 + delta)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _adjust_contrast(rgb, delta):
    arr = rgb.astype(np.float64)
    pivot = float((arr @ _LUMA).mean())
    out = (arr - pivot) * (1.0 + delta) + pivot
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _rotate_rgb(rgb, angle_deg):
    # bilinear, exposed corners filled black
    return ndimage.rotate(
        rgb, angle_deg, axes=(1, 0), reshape=False, order=1,
        mode="constant", cval=0,
    ).astype(np.uint8)


def _rotate_depth(depth, angle_deg):
    # nearest neighbor so missing and valid samples never blend;
    # exposed corners become missing
    return ndimage.rotate(
        depth, angle_deg, axes=(1, 0), reshape=False, order=0,
        mode="constant", cval=0,
    ).astype(np.uint16)


def mirror_pair(pair, kind="mirror", seed=None):
    """Horizontal mirror of RGB and depth together (an involution)."""
    return FramePair(
        rgb=RasterImage(pair.rgb.pixels[:, ::-1].copy()),
        depth=DepthMap(pair.depth.data[:, ::-1].copy()),
        source_id=f"{pair.source_id}__{kind}",
        family_id=pair.family_id,
        provenance=Provenance(kind=kind, seed=seed),
    )


def augment(pair, seed):
    """Produce the four augmented variants of one pair.

    1. saturation-scaled RGB, depth untouched;
    2. horizontally mirrored RGB and depth;
    3. both of the above;
    4. a seeded random combination of brightness, contrast, rotation,
       horizontal flip, and saturation, with the geometric parts applied
       to the depth map as well.

    Deterministic for a given (pair, seed).
    """
    sat = FramePair(
        rgb=RasterImage(_scale_saturation(pair.rgb.pixels, SATURATION_FACTOR)),
        depth=pair.depth,
        source_id=f"{pair.source_id}__saturation",
        family_id=pair.family_id,
        provenance=Provenance(kind="saturation"),
    )
    mirrored = mirror_pair(pair)
    sat_mirrored = FramePair(
        rgb=RasterImage(_scale_saturation(mirrored.rgb.pixels, SATURATION_FACTOR)),
        depth=mirrored.depth,
        source_id=f"{pair.source_id}__saturation_mirror",
        family_id=pair.family_id,
        provenance=Provenance(kind="saturation_mirror"),
    )

    pair_seed = derive_seed(seed, pair.source_id)
    rng = np.random.default_rng(pair_seed)
    flip = bool(rng.random() < 0.5)
    angle = float(rng.uniform(-RANDOM_ROTATION_DEG, RANDOM_ROTATION_DEG))
    brightness = float(rng.uniform(-RANDOM_BRIGHTNESS, RANDOM_BRIGHTNESS))
    contrast = float(rng.uniform(-RANDOM_CONTRAST, RANDOM_CONTRAST))
    saturation = 1.0 + float(rng.uniform(-RANDOM_SATURATION, RANDOM_SATURATION))

    rgb = pair.rgb.pixels
    depth = pair.depth.data
    if flip:
        rgb = rgb[:, ::-1]
        depth = depth[:, ::-1]
    rgb = _rotate_rgb(rgb, angle)
    depth = _rotate_depth(depth, angle)
    rgb = _adjust_brightness(rgb, brightness)
    rgb = _adjust_contrast(rgb, contrast)
    rgb = _scale_saturation(rgb, saturation)
    randomized = FramePair(
        rgb=RasterImage(rgb),
        depth=DepthMap(depth),
        source_id=f"{pair.source_id}__random",
        family_id=pair.family_id,
        provenance=Provenance(kind="random", seed=pair_seed),
    )
    return [sat, mirrored, sat_mirrored, randomized]


def _resize_nearest(data, target_w, target_h):
    h, w = data.shape
    rows = np.minimum((np.arange(target_h) + 0.5) * h / target_h, h - 1).astype(int)
    cols = np.minimum((np.arange(target_w) + 0.5) * w / target_w, w - 1).astype(int)
    return data[np.ix_(rows, cols)].copy()


def resize_pair(pair, target=(640, 640)):
    """Resize RGB bilinearly, depth by nearest neighbor, to (width, height)."""
    tw, th = target
    if tw < 1 or th < 1:
        raise ValueError("target dimensions must be positive")
    rgb = np.asarray(
        Image.fromarray(pair.rgb.pixels).resize((tw, th), Image.Resampling.BILINEAR)
    )
    depth = _resize_nearest(pair.depth.data, tw, th)
    return FramePair(
        rgb=RasterImage(rgb),
        depth=DepthMap(depth),
        source_id=pair.source_id,
        family_id=pair.family_id,
        provenance=pair.provenance,
    )


def split(pairs, test_count, seed):
    """Partition pairs into train/test by family, deterministically.

    Families (an original plus all of its augmented variants) move as one
    unit; the test families are chosen by a seeded shuffle of the family
    ids in first-appearance order.

    Raises:
        InsufficientData: test_count is not below the family count.
    """
    if test_count < 0:
        raise ValueError("test_count must be >= 0")
    families = []
    seen = set()
    for p in pairs:
        if p.family_id not in seen:
            seen.add(p.family_id)
            families.append(p.family_id)
    if test_count >= len(families) and test_count > 0:
        raise InsufficientData(
            f"requested {test_count} test families but only "
            f"{len(families)} exist"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(families))
    test_families = {families[i] for i in order[:test_count]}
    train_ids = tuple(p.source_id for p in pairs if p.family_id not in test_families)
    test_ids = tuple(p.source_id for p in pairs if p.family_id in test_families)
    return SplitManifest(train_ids=train_ids, test_ids=test_ids, seed=seed)
