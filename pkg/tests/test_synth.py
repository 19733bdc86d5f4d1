import math

import numpy as np
import pytest

from roadchar.characterize import depth_stats, frame_report
from roadchar.errors import InsufficientDepthCoverage, PrimitiveOutOfBounds
from roadchar.raster import Polygon, extract_instances
from roadchar.synth import (
    EllipsePrimitive,
    PolygonPrimitive,
    SceneSpec,
    generate,
    random_scene_spec,
    round_trip_check,
)


def one_ellipse_spec(offset=0.1875, plane=0.5625):
    return SceneSpec(
        plane_depth=plane,
        primitives=(EllipsePrimitive(cx=48.3, cy=50.7, a=20, b=20, depth_offset=offset),),
    )


def test_generate_single_ellipse_expected_values():
    # dyadic analog of the bowl example: plane + offset recovered exactly
    spec = SceneSpec(
        plane_depth=0.55,
        primitives=(EllipsePrimitive(cx=48.0, cy=50.0, a=20, b=20, depth_offset=0.20),),
    )
    scene = generate(spec, 100, 100, seed=1)
    exp = scene.expected.instances[0]
    assert exp.p_d == pytest.approx(0.75, abs=1e-12)
    assert exp.s_d == pytest.approx(0.55, abs=1e-12)
    assert exp.rp_d_difference == pytest.approx(20.0, abs=1e-9)
    # the mask is a disk of radius 20: area close to pi r^2
    assert exp.pixel_area == pytest.approx(math.pi * 400, rel=0.02)
    assert 0 < exp.contour_area < exp.pixel_area


def test_generate_zero_primitives():
    scene = generate(SceneSpec(plane_depth=0.5, primitives=()), 40, 40, seed=0)
    assert scene.all_mask.pixel_count() == 0
    report = frame_report("empty", [], 40 * 40, scene.depth_field)
    assert report.damage_percent == 0.0
    assert f"{report.damage_percent:.2f}" == "0.00"


def test_generate_determinism():
    spec = SceneSpec(
        plane_depth=0.5,
        primitives=(EllipsePrimitive(48.3, 50.7, 12, 9, 0.25),),
        noise_sigma=0.02,
        missing_speckle=0.1,
    )
    a = generate(spec, 96, 96, seed=77)
    b = generate(spec, 96, 96, seed=77)
    assert (a.depth_map.data == b.depth_map.data).all()
    assert (a.rgb.pixels == b.rgb.pixels).all()
    assert np.array_equal(a.depth_field, b.depth_field, equal_nan=True)
    c = generate(spec, 96, 96, seed=78)
    assert not np.array_equal(a.depth_field, c.depth_field, equal_nan=True)


def test_generate_out_of_bounds():
    with pytest.raises(PrimitiveOutOfBounds):
        generate(
            SceneSpec(0.5, (EllipsePrimitive(5.0, 5.0, 10, 10, 0.1),)), 64, 64
        )


def test_generate_touching_primitives_rejected():
    spec = SceneSpec(
        0.5,
        (
            EllipsePrimitive(20.0, 20.0, 8, 8, 0.1),
            EllipsePrimitive(30.0, 20.0, 8, 8, 0.1),
        ),
    )
    with pytest.raises(ValueError):
        generate(spec, 64, 64)


def test_full_speckle_forces_coverage_error():
    spec = SceneSpec(
        plane_depth=0.5,
        primitives=(EllipsePrimitive(30.3, 30.3, 10, 10, 0.25),),
        missing_speckle=1.0,
    )
    scene = generate(spec, 64, 64, seed=3)
    insts = extract_instances(scene.all_mask)
    with pytest.raises(InsufficientDepthCoverage):
        depth_stats(insts[0], scene.all_mask, scene.depth_field)


def test_round_trip_noiseless_exact():
    scene = generate(one_ellipse_spec(), 100, 100, seed=5)
    diag = round_trip_check(scene)
    assert diag.passed, diag.failures
    assert diag.checks > 0


def test_round_trip_random_scenes(rng):
    for i in range(10):
        spec = random_scene_spec(rng, 120, 120)
        scene = generate(spec, 120, 120, seed=1000 + i)
        diag = round_trip_check(scene)
        assert diag.passed, diag.failures


def test_round_trip_band_exclusion_between_neighbors():
    # two bowls whose bands overlap each other's dilation
    spec = SceneSpec(
        plane_depth=0.5,
        primitives=(
            EllipsePrimitive(30.3, 40.2, 10, 10, 0.25),
            EllipsePrimitive(60.7, 40.2, 10, 10, 0.125),
        ),
    )
    scene = generate(spec, 100, 80, seed=9, band_radius=12)
    # expected S_D equals the plane exactly despite overlapping dilations
    for exp in scene.expected.instances:
        assert exp.s_d == 0.5
    diag = round_trip_check(scene)
    assert diag.passed, diag.failures


def test_round_trip_mirrored_scene_same_damage():
    spec = SceneSpec(
        plane_depth=0.5,
        primitives=(EllipsePrimitive(30.3, 40.7, 12, 8, 0.25),),
    )
    mirrored = SceneSpec(
        plane_depth=0.5,
        primitives=(EllipsePrimitive(100 - 30.3, 40.7, 12, 8, 0.25),),
    )
    a = generate(spec, 100, 80, seed=1)
    b = generate(mirrored, 100, 80, seed=1)
    assert a.expected.instances[0].pixel_area == b.expected.instances[0].pixel_area
    assert a.expected.instances[0].contour_area == pytest.approx(
        b.expected.instances[0].contour_area, abs=1e-9
    )
    assert a.expected.damage_percent == pytest.approx(
        b.expected.damage_percent, abs=1e-9
    )


def test_round_trip_under_noise():
    spec = SceneSpec(
        plane_depth=0.5,
        primitives=(EllipsePrimitive(48.3, 50.7, 16, 16, 0.25),),
        noise_sigma=0.005,
    )
    scene = generate(spec, 100, 100, seed=21)
    diag = round_trip_check(scene)
    assert diag.passed, diag.failures


def test_polygon_primitive_scene():
    # a long thin triangle: fractional contour area, polygon-consistent mask
    poly = Polygon(np.array([[0.1, 0.1], [0.9, 0.12], [0.12, 0.5]]))
    spec = SceneSpec(plane_depth=0.5, primitives=(PolygonPrimitive(poly, 0.25),))
    scene = generate(spec, 80, 80, seed=2)
    assert scene.annotations[0] == poly
    diag = round_trip_check(scene)
    assert diag.passed, diag.failures


def test_polygon_primitive_mask_matches_production_rasterizer():
    from roadchar.raster import rasterize_polygon

    poly = Polygon(np.array([[0.2, 0.15], [0.8, 0.3], [0.6, 0.85], [0.15, 0.6]]))
    spec = SceneSpec(plane_depth=0.5, primitives=(PolygonPrimitive(poly, 0.25),))
    scene = generate(spec, 64, 64, seed=0)
    production = rasterize_polygon(poly, 64, 64)
    assert (scene.masks[0].data == production.data).all()


def test_random_scene_spec_dyadic_and_in_bounds(rng):
    for _ in range(20):
        spec = random_scene_spec(rng, 96, 96)
        assert (spec.plane_depth * 64) == int(spec.plane_depth * 64)
        for prim in spec.primitives:
            assert (prim.depth_offset * 64) == int(prim.depth_offset * 64)
        scene = generate(spec, 96, 96, seed=0)
        assert len(scene.masks) == len(spec.primitives)
