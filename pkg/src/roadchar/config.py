"""Pipeline configuration: one place for every tunable parameter.

Precedence is defaults < config file < explicit overrides (CLI flags).
The config file is a flat ``key = value`` text file; the environment
variable ``ROADCHAR_CONFIG`` names a fallback file path.
"""

import os
from dataclasses import dataclass, fields

RPD_MODES = ("difference", "ratio")

ENV_CONFIG = "ROADCHAR_CONFIG"


@dataclass(frozen=True)
class Config:
    """Tunable parameters shared by the characterization pipeline.

    Attributes:
        band_radius: Euclidean radius (px) of the surrounding band.
        rpd_mode: default relative-depth mode, "difference" or "ratio".
        depth_range_mm: depth normalization range; default is the far
            range of a Kinect V2.
        conf_threshold: detection confidence cutoff for summary metrics
            and the confusion matrix.
        iou_threshold: IoU cutoff for detection matching.
        connectivity: 4 or 8, for instance extraction.
        min_valid_fraction: minimum valid-depth fraction per region.
        seed: master seed for every randomized step.
        round_percent: display decimals for percentages.
        round_depth: display decimals for normalized depths.
    """

    band_radius: int = 15
    rpd_mode: str = "difference"
    depth_range_mm: float = 4500.0
    conf_threshold: float = 0.25
    iou_threshold: float = 0.50
    connectivity: int = 8
    min_valid_fraction: float = 0.2
    seed: int = 0
    round_percent: int = 2
    round_depth: int = 4

    def __post_init__(self):
        if self.band_radius < 1:
            raise ValueError("band_radius must be >= 1")
        if self.rpd_mode not in RPD_MODES:
            raise ValueError(f"rpd_mode must be one of {RPD_MODES}")
        if self.depth_range_mm <= 0:
            raise ValueError("depth_range_mm must be positive")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ValueError("conf_threshold must lie in [0, 1]")
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ValueError("iou_threshold must lie in [0, 1]")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        if not 0.0 <= self.min_valid_fraction <= 1.0:
            raise ValueError("min_valid_fraction must lie in [0, 1]")
        if self.round_percent < 0 or self.round_depth < 0:
            raise ValueError("rounding decimals must be >= 0")


def _coerce(name, kind, raw):
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ValueError(f"config key {name!r}: cannot parse {raw!r}") from exc


def read_config_file(path):
    """Parse a ``key = value`` config file into a dict of typed values."""
    kinds = {f.name: type(f.default) for f in fields(Config)}
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{ln}: expected 'key = value'")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in kinds:
                raise ValueError(f"{path}:{ln}: unknown config key {key!r}")
            values[key] = _coerce(key, kinds[key], raw)
    return values


def write_config_file(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        for f in fields(Config):
            fh.write(f"{f.name} = {getattr(config, f.name)}\n")


def load_config(path=None, **overrides):
    """Build a Config from defaults, an optional file, and overrides.

    Args:
        path: config file path; when None, the ROADCHAR_CONFIG environment
            variable is consulted.
        **overrides: explicit settings that win over the file; None values
            are ignored so absent CLI flags fall through.
    """
    values = {}
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    if path is not None:
        values.update(read_config_file(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config(**values)
