"""PNG codecs for the on-disk interchange formats.

Depth maps are 16-bit single-channel PNGs holding millimeters, 0 =
missing. Masks are 8-bit single-channel PNGs, 0 = background and 255 =
pothole. RGB frames are plain 8-bit color PNGs.
"""

import numpy as np
from PIL import Image

from .raster import BinaryMask, DepthMap, RasterImage


def read_rgb(path):
    with Image.open(path) as im:
        return RasterImage(np.asarray(im.convert("RGB")))


def write_rgb(path, image):
    arr = image.pixels
    if arr.ndim == 2:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    else:
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def read_depth(path):
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim != 2:
        raise ValueError(f"{path}: depth PNG must be single-channel, got {arr.shape}")
    if arr.dtype == np.uint8:
        # tolerate 8-bit scans; values are still millimeters
        arr = arr.astype(np.uint16)
    elif arr.dtype == np.int32:
        # PIL reports some 16-bit grayscale PNGs as mode "I"
        arr = arr.astype(np.uint16)
    elif arr.dtype != np.uint16:
        raise ValueError(f"{path}: unsupported depth dtype {arr.dtype}")
    return DepthMap(arr)


def write_depth(path, depth):
    Image.fromarray(np.asarray(depth.data, dtype=np.uint16)).save(path, format="PNG")


def read_mask(path):
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return BinaryMask(arr > 127)


def write_mask(path, mask):
    arr = np.where(mask.data, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")
