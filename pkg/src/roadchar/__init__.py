"""roadchar: pothole characterization from segmentation masks and depth maps.

A batch library plus CLI that turns per-frame segmentation results and
millimeter depth maps into maintenance-grade measurements: instance
geometry (pixel and contour areas), frame damage percentage, pothole
versus surrounding-band depth, relative pothole depth, plus detection
metrics (P/R/F1, AP, mAP) and depth-prediction RMSE evaluation.
"""

from .characterize import (
    DepthStats,
    FrameReport,
    PotholeRecord,
    damage_percent,
    depth_stats,
    frame_report,
    normalize_depth,
    relative_depth,
    severity,
)
from .config import Config, load_config
from .dataset import (
    FramePair,
    Provenance,
    SplitManifest,
    augment,
    clean,
    mirror_pair,
    resize_pair,
    split,
)
from .deptheval import DepthEvalResult, evaluate_pairs, evaluate_set, rmse
from .errors import (
    DegeneratePolygon,
    DimensionMismatch,
    EmptyComponent,
    InsufficientData,
    InsufficientDepthCoverage,
    MalformedLine,
    MissingCounterpart,
    NoValidPixels,
    OutOfRangeCoordinate,
    PrimitiveOutOfBounds,
    RoadcharError,
    ZeroSurroundDepth,
)
from .metrics import (
    ConfusionMatrix,
    Detection,
    GroundTruth,
    MetricsSummary,
    average_precision,
    confusion_matrix,
    curves,
    iou_box,
    iou_mask,
    map_suite,
    match,
    precision_recall_f1,
    summarize,
)
from .raster import (
    BinaryMask,
    DepthMap,
    Instance,
    Polygon,
    RasterImage,
    connected_components,
    extract_instances,
    rasterize_polygon,
    shoelace_area,
    surrounding_band,
    trace_contour,
    union_mask,
)
from .synth import (
    EllipsePrimitive,
    PolygonPrimitive,
    SceneSpec,
    SyntheticScene,
    generate,
    random_scene_spec,
    round_trip_check,
)

__version__ = "0.1.0"
