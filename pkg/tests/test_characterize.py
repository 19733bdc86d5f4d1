import math

import numpy as np
import pytest

from roadchar.characterize import (
    damage_percent,
    depth_stats,
    frame_report,
    normalize_depth,
    relative_depth,
    severity,
)
from roadchar.config import Config
from roadchar.errors import InsufficientDepthCoverage, ZeroSurroundDepth
from roadchar.raster import BinaryMask, DepthMap, extract_instances
from roadchar.synth import brute_masked_mean

from conftest import make_mask


def bowl_field(shape, mask, plane, offset):
    field = np.full(shape, plane, dtype=np.float64)
    field[mask] = plane + offset
    return field


def single_instance(shape, box):
    mask = make_mask(shape, [box])
    insts = extract_instances(BinaryMask(mask))
    assert len(insts) == 1
    return insts[0], BinaryMask(mask)


# ---------------------------------------------------------------------------
# normalize_depth
# ---------------------------------------------------------------------------


def test_normalize_linear_map():
    depth = DepthMap(np.array([[2250, 0], [9000, 4500]], dtype=np.uint16))
    field = normalize_depth(depth, 4500.0)
    assert field[0, 0] == 0.5
    assert math.isnan(field[0, 1])
    assert field[1, 0] == 1.0  # clamped
    assert field[1, 1] == 1.0


def test_normalize_requires_positive_range():
    with pytest.raises(ValueError):
        normalize_depth(DepthMap(np.ones((2, 2), dtype=np.uint16)), 0.0)


# ---------------------------------------------------------------------------
# depth_stats
# ---------------------------------------------------------------------------


def test_depth_stats_synthetic_bowl():
    inst, allm = single_instance((60, 60), (20, 36, 22, 38))
    field = bowl_field((60, 60), inst.mask.data, 0.55, 0.20)
    stats = depth_stats(inst, allm, field, band_radius=4)
    assert stats.p_d == 0.75  # dyadic constant, exact under any mean
    assert abs(stats.s_d - 0.55) < 1e-12
    from roadchar.raster import surrounding_band

    band = surrounding_band(inst.mask, allm, 4)
    # nanmean (pairwise) and fsum can differ by one ulp on non-dyadic values
    assert stats.s_d == pytest.approx(brute_masked_mean(field, band.data), abs=1e-12)
    assert stats.valid_pothole_fraction == 1.0
    assert stats.valid_band_fraction == 1.0


def test_depth_stats_all_pothole_pixels_missing():
    inst, allm = single_instance((30, 30), (10, 20, 10, 20))
    field = bowl_field((30, 30), inst.mask.data, 0.5, 0.25)
    field[inst.mask.data] = np.nan
    with pytest.raises(InsufficientDepthCoverage) as exc:
        depth_stats(inst, allm, field)
    assert exc.value.region == "pothole"
    assert exc.value.fraction == 0.0


def test_depth_stats_band_coverage_failure_names_band():
    inst, allm = single_instance((30, 30), (10, 20, 10, 20))
    field = bowl_field((30, 30), inst.mask.data, 0.5, 0.25)
    field[~inst.mask.data] = np.nan
    with pytest.raises(InsufficientDepthCoverage) as exc:
        depth_stats(inst, allm, field, band_radius=3)
    assert exc.value.region == "band"


def test_depth_stats_echoes_published_means():
    # field shaped like the published example: pothole 0.7693, band 0.5808
    inst, allm = single_instance((50, 50), (15, 35, 15, 35))
    field = bowl_field((50, 50), inst.mask.data, 0.5808, 0.7693 - 0.5808)
    stats = depth_stats(inst, allm, field, band_radius=5)
    assert round(stats.p_d, 4) == 0.7693
    assert round(stats.s_d, 4) == 0.5808
    assert abs(stats.p_d - 0.7693) < 1e-12
    assert abs(stats.s_d - 0.5808) < 1e-12


def test_depth_stats_matches_brute_force_on_random_fields(rng):
    from roadchar.raster import surrounding_band

    for _ in range(15):
        inst, allm = single_instance((36, 36), (12, 24, 10, 26))
        field = rng.uniform(0.0, 1.0, (36, 36))
        field[rng.random((36, 36)) < 0.15] = np.nan
        try:
            stats = depth_stats(inst, allm, field, band_radius=4)
        except InsufficientDepthCoverage:
            continue
        band = surrounding_band(inst.mask, allm, 4)
        assert stats.p_d == pytest.approx(
            brute_masked_mean(field, inst.mask.data), abs=1e-12
        )
        assert stats.s_d == pytest.approx(
            brute_masked_mean(field, band.data), abs=1e-12
        )


def test_depth_stats_min_fraction_threshold(rng):
    inst, allm = single_instance((40, 40), (10, 30, 10, 30))
    field = bowl_field((40, 40), inst.mask.data, 0.5, 0.25)
    # blank 90% of pothole pixels: 10% coverage < default 20%
    idx = np.argwhere(inst.mask.data)
    drop = idx[rng.permutation(len(idx))[: int(0.9 * len(idx))]]
    field[drop[:, 0], drop[:, 1]] = np.nan
    with pytest.raises(InsufficientDepthCoverage):
        depth_stats(inst, allm, field)
    stats = depth_stats(inst, allm, field, min_valid_fraction=0.05)
    assert stats.p_d == 0.75


# ---------------------------------------------------------------------------
# relative_depth
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "p_d, s_d, expected",
    [
        (0.7693, 0.5808, 18.85),
        (0.6925, 0.5254, 16.71),
        (0.6046, 0.5200, 8.46),
        (0.6659, 0.6631, 0.28),
    ],
)
def test_relative_depth_difference_reproduces_published(p_d, s_d, expected):
    assert round(relative_depth(p_d, s_d, "difference"), 2) == expected


@pytest.mark.parametrize(
    "p_d, s_d, expected",
    [
        (0.7693, 0.5808, 32.46),
        (0.6925, 0.5254, 31.80),
        (0.6046, 0.5200, 16.27),
    ],
)
def test_relative_depth_ratio_mode(p_d, s_d, expected):
    assert round(relative_depth(p_d, s_d, "ratio"), 2) == expected


def test_relative_depth_equal_means_zero():
    assert relative_depth(0.4, 0.4, "difference") == 0.0
    assert relative_depth(0.4, 0.4, "ratio") == 0.0


def test_relative_depth_zero_band_raises_in_ratio_mode():
    with pytest.raises(ZeroSurroundDepth):
        relative_depth(0.4, 0.0, "ratio")
    assert relative_depth(0.4, 0.0, "difference") == 40.0


def test_relative_depth_unknown_mode():
    with pytest.raises(ValueError):
        relative_depth(0.4, 0.3, "quotient")


def test_relative_depth_algebraic_identity(rng):
    for _ in range(200):
        p_d = float(rng.uniform(0.0, 1.0))
        s_d = float(rng.uniform(0.01, 1.0))
        ratio = relative_depth(p_d, s_d, "ratio")
        diff = relative_depth(p_d, s_d, "difference")
        assert abs(ratio - diff / s_d) <= 1e-9


def test_relative_depth_scale_invariance():
    p_d, s_d = 0.3, 0.2
    base_ratio = relative_depth(p_d, s_d, "ratio")
    base_diff = relative_depth(p_d, s_d, "difference")
    for k in (0.5, 2.0):
        assert relative_depth(k * p_d, k * s_d, "ratio") == pytest.approx(
            base_ratio, abs=1e-9
        )
        assert relative_depth(k * p_d, k * s_d, "difference") == pytest.approx(
            k * base_diff, abs=1e-9
        )


# ---------------------------------------------------------------------------
# severity and frame_report
# ---------------------------------------------------------------------------


def _record(contour_area, diff):
    from roadchar.characterize import PotholeRecord

    return PotholeRecord(
        id=0,
        pixel_area=int(contour_area) + 1,
        contour_area=contour_area,
        bbox=(0, 0, 1, 1),
        centroid=(0.5, 0.5),
        rp_d_difference=diff,
    )


def test_severity_examples():
    assert severity(_record(100.0, -3.0)) == 0.0
    assert severity(_record(100.0, 10.0)) == 1000.0
    assert severity(_record(100.0, None)) == 0.0
    # equal areas: the deeper pothole ranks higher
    assert severity(_record(50.0, 18.85)) > severity(_record(50.0, 8.46))


def test_damage_percent_published_rows():
    rows = [
        ([12101.0], 4.92),
        ([1723.5, 3778.0], 2.24),
        ([2497.0, 1113.5, 43.0], 1.49),
        ([5929.0], 2.41),
        ([8923.0], 3.63),
    ]
    for areas, expected in rows:
        assert round(damage_percent(areas, 245760), 2) == expected


def test_frame_report_no_instances():
    report = frame_report("empty", [], 640 * 640)
    assert report.potholes == ()
    assert report.damage_percent == 0.0
    assert f"{report.damage_percent:.2f}" == "0.00"


def test_frame_report_geometry_only():
    mask = make_mask((64, 64), [(10, 20, 10, 20), (40, 50, 30, 45)])
    insts = extract_instances(BinaryMask(mask))
    report = frame_report("f", insts, 64 * 64)
    assert len(report.potholes) == 2
    assert report.total_pothole_area == sum(i.contour_area for i in insts)
    assert all(r.depth_stats is None for r in report.potholes)
    # no depth: severity 0 everywhere, order falls back to instance id
    assert [r.id for r in report.potholes] == [0, 1]


def test_frame_report_orders_by_severity():
    shape = (80, 80)
    mask = make_mask(shape, [(5, 15, 5, 15), (40, 50, 40, 50)])
    insts = extract_instances(BinaryMask(mask))
    field = np.full(shape, 0.5)
    field[5:15, 5:15] = 0.5625  # shallow
    field[40:50, 40:50] = 0.75  # deep
    report = frame_report("f", insts, 80 * 80, field, Config(band_radius=4))
    assert [r.id for r in report.potholes] == [1, 0]
    assert report.potholes[0].severity > report.potholes[1].severity
    for rec in report.potholes:
        assert rec.rp_d_ratio is not None and rec.rp_d_difference is not None
        assert math.copysign(1, rec.rp_d_ratio) == math.copysign(1, rec.rp_d_difference)


def test_frame_report_coverage_failure_becomes_warning():
    shape = (60, 60)
    mask = make_mask(shape, [(10, 20, 10, 20), (35, 45, 35, 45)])
    insts = extract_instances(BinaryMask(mask))
    field = np.full(shape, 0.5)
    field[35:45, 35:45] = 0.75
    field[10:20, 10:20] = np.nan  # first pothole unreadable
    report = frame_report("f", insts, 60 * 60, field, Config(band_radius=4))
    by_id = {r.id: r for r in report.potholes}
    assert by_id[0].depth_stats is None
    assert "pothole" in by_id[0].depth_warning
    assert by_id[1].depth_stats is not None


def test_damage_percent_mirror_invariance(rng):
    for _ in range(10):
        mask = np.zeros((48, 48), bool)
        mask[10:30, 8:25] = True
        mask[rng.random((48, 48)) < 0.02] = True
        insts = extract_instances(BinaryMask(mask))
        mirrored = extract_instances(BinaryMask(mask[:, ::-1].copy()))
        a = frame_report("a", insts, 48 * 48)
        b = frame_report("b", mirrored, 48 * 48)
        assert sorted(r.pixel_area for r in a.potholes) == sorted(
            r.pixel_area for r in b.potholes
        )
        assert abs(a.total_pothole_area - b.total_pothole_area) < 1e-9
        assert abs(a.damage_percent - b.damage_percent) < 1e-9


def test_severity_order_independent_of_frame_area():
    shape = (80, 80)
    mask = make_mask(shape, [(5, 15, 5, 15), (40, 50, 40, 50)])
    insts = extract_instances(BinaryMask(mask))
    field = np.full(shape, 0.5)
    field[5:15, 5:15] = 0.5625
    field[40:50, 40:50] = 0.75
    small = frame_report("s", insts, 80 * 80, field, Config(band_radius=4))
    large = frame_report("l", insts, 10 * 80 * 80, field, Config(band_radius=4))
    assert [r.id for r in small.potholes] == [r.id for r in large.potholes]
    assert large.damage_percent == pytest.approx(small.damage_percent / 10)
