import json
import subprocess
import sys

import numpy as np
import pytest

from roadchar.annotations import write_annotation_file
from roadchar.cli import main
from roadchar.metrics import Detection, GroundTruth
from roadchar.pngio import read_depth, read_rgb, write_depth, write_rgb
from roadchar.raster import DepthMap, Polygon, RasterImage
from roadchar.reports import parse_report
from roadchar.synth import PolygonPrimitive, SceneSpec, generate


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_data_error_exits_1_with_json_diagnostics(tmp_path, capsys):
    (tmp_path / "frames").mkdir()
    (tmp_path / "preds").mkdir()
    rc = main(
        [
            "characterize",
            "--frames", str(tmp_path / "frames"),
            "--preds", str(tmp_path / "preds"),
            "--out", str(tmp_path / "out"),
        ]
    )
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "RoadcharError"
    assert "message" in err


def test_synth_writes_standard_layout(tmp_path):
    out = tmp_path / "ds"
    rc = main(["synth", "--out", str(out), "--scenes", "3", "--seed", "5",
               "--width", "96", "--height", "96"])
    assert rc == 0
    for sub in ("rgb", "depth", "labels", "preds"):
        assert sorted(p.name for p in (out / sub).iterdir()) == [
            "scene0000.png" if sub in ("rgb", "depth") else "scene0000.txt",
            "scene0001.png" if sub in ("rgb", "depth") else "scene0001.txt",
            "scene0002.png" if sub in ("rgb", "depth") else "scene0002.txt",
        ]
    doc = json.loads((out / "scenes.json").read_text())
    assert len(doc["scenes"]) == 3
    assert all(s["instances"] for s in doc["scenes"])


def test_synth_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert main(["synth", "--out", str(out), "--scenes", "2", "--seed", "9"]) == 0
    for rel in ("rgb/scene0000.png", "depth/scene0001.png", "labels/scene0000.txt",
                "scenes.json"):
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def _write_polygon_scene(root):
    """A scene whose mask comes from the annotation polygon itself and whose
    depths survive the 16-bit mm round trip exactly (0.5 and 0.75)."""
    poly = Polygon(np.array([[0.2, 0.2], [0.7, 0.25], [0.65, 0.7], [0.25, 0.65]]))
    spec = SceneSpec(plane_depth=0.5, primitives=(PolygonPrimitive(poly, 0.25),))
    scene = generate(spec, 80, 80, seed=3, band_radius=10, frame_id="poly0")
    for sub in ("rgb", "depth", "preds", "labels"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    write_rgb(root / "rgb" / "poly0.png", scene.rgb)
    write_depth(root / "depth" / "poly0.png", scene.depth_map)
    det = Detection("poly0", 0, poly, 0.9)
    write_annotation_file(root / "preds" / "poly0.txt", [det])
    write_annotation_file(
        root / "labels" / "poly0.txt", [GroundTruth("poly0", 0, poly)]
    )
    return scene


def test_characterize_end_to_end_matches_expected(tmp_path):
    scene = _write_polygon_scene(tmp_path)
    out = tmp_path / "out"
    rc = main(
        [
            "characterize",
            "--frames", str(tmp_path / "rgb"),
            "--preds", str(tmp_path / "preds"),
            "--depths", str(tmp_path / "depth"),
            "--out", str(out),
            "--band-radius", "10",
            "--csv",
        ]
    )
    assert rc == 0
    report = parse_report((out / "reports" / "poly0.json").read_text())
    exp = scene.expected.instances[0]
    rec = report.potholes[0]
    assert rec.pixel_area == exp.pixel_area
    assert rec.contour_area == pytest.approx(exp.contour_area, abs=1e-9)
    assert rec.depth_stats.p_d == exp.p_d  # 0.75 survives the mm round trip
    assert rec.depth_stats.s_d == exp.s_d
    assert rec.rp_d_difference == pytest.approx(exp.rp_d_difference, abs=1e-9)
    assert (out / "overlays" / "poly0.png").exists()
    assert (out / "potholes.csv").read_text().count("\n") == 2  # header + 1 row


def test_characterize_without_depth(tmp_path):
    _write_polygon_scene(tmp_path)
    out = tmp_path / "nodepth"
    rc = main(
        [
            "characterize",
            "--frames", str(tmp_path / "rgb"),
            "--preds", str(tmp_path / "preds"),
            "--out", str(out),
        ]
    )
    assert rc == 0
    report = parse_report((out / "reports" / "poly0.json").read_text())
    assert report.potholes[0].depth_stats is None


def test_characterize_masks_input(tmp_path):
    from roadchar.pngio import write_mask

    scene = _write_polygon_scene(tmp_path)
    (tmp_path / "masks").mkdir()
    write_mask(tmp_path / "masks" / "poly0.png", scene.all_mask)
    out = tmp_path / "frommasks"
    rc = main(
        [
            "characterize",
            "--frames", str(tmp_path / "rgb"),
            "--masks", str(tmp_path / "masks"),
            "--out", str(out),
        ]
    )
    assert rc == 0
    report = parse_report((out / "reports" / "poly0.json").read_text())
    assert report.potholes[0].pixel_area == scene.expected.instances[0].pixel_area


def test_evaluate_perfect_predictions(tmp_path):
    out = tmp_path / "ds"
    assert main(["synth", "--out", str(out), "--scenes", "4", "--seed", "11"]) == 0
    metrics_out = tmp_path / "metrics"
    rc = main(
        [
            "evaluate",
            "--labels", str(out / "labels"),
            "--preds", str(out / "preds"),
            "--out", str(metrics_out),
            "--width", "160",
            "--height", "160",
        ]
    )
    assert rc == 0
    summary = parse_report((metrics_out / "summary.json").read_text())
    assert summary.box.mean.ap50 == 1.0
    assert summary.mask.mean.ap50 == 1.0
    assert summary.box.mean.ap50_95 == 1.0
    assert summary.box.confusion.fn == 0 and summary.box.confusion.fp == 0
    for name in ("curves_box.csv", "curves_mask.csv", "pr_box.csv", "pr_mask.csv"):
        assert (metrics_out / name).exists()


def test_depth_eval_cli(tmp_path):
    out = tmp_path / "ds"
    assert main(["synth", "--out", str(out), "--scenes", "2", "--seed", "2"]) == 0
    result_path = tmp_path / "depths.json"
    rc = main(
        [
            "depth-eval",
            "--preds", str(out / "depth"),
            "--gt", str(out / "depth"),
            "--out", str(result_path),
        ]
    )
    assert rc == 0
    result = parse_report(result_path.read_text())
    assert result.mean_rmse == 0.0
    assert result.units == "normalized"


def _write_raw_dataset(root, rng):
    (root / "rgb").mkdir(parents=True)
    (root / "depth").mkdir()
    for i in range(4):
        rgb = RasterImage(rng.integers(0, 255, size=(48, 64, 3)).astype(np.uint8))
        if i == 3:
            depth = np.zeros((48, 64), dtype=np.uint16)  # dead scan
        else:
            depth = rng.integers(200, 4000, size=(48, 64)).astype(np.uint16)
        write_rgb(root / "rgb" / f"img{i}.png", rgb)
        write_depth(root / "depth" / f"img{i}.png", DepthMap(depth))


def test_prep_pipeline(tmp_path, rng):
    raw = tmp_path / "raw"
    _write_raw_dataset(raw, rng)
    out = tmp_path / "prepd"
    rc = main(
        [
            "prep",
            "--input", str(raw),
            "--out", str(out),
            "--test-count", "1",
            "--seed", "7",
            "--width", "32",
            "--height", "32",
        ]
    )
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["counts"] == {
        "input_pairs": 4,
        "removed": 1,
        "originals_kept": 3,
        "augmented": 12,
        "total": 15,
        "train": 10,
        "test": 5,
    }
    test_families = {manifest["provenance"][i]["family"] for i in manifest["test_ids"]}
    assert len(test_families) == 1
    sample = read_rgb(out / "rgb" / f"{manifest['train_ids'][0]}.png")
    assert sample.width == 32 and sample.height == 32
    depth = read_depth(out / "depth" / f"{manifest['train_ids'][0]}.png")
    assert depth.width == 32


def test_prep_deterministic(tmp_path, rng):
    raw = tmp_path / "raw"
    _write_raw_dataset(raw, rng)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(
            ["prep", "--input", str(raw), "--out", str(out),
             "--test-count", "1", "--seed", "7"]
        ) == 0
        outs.append(out)
    a, b = outs
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    name = json.loads((a / "manifest.json").read_text())["train_ids"][0]
    assert (a / "rgb" / f"{name}.png").read_bytes() == (b / "rgb" / f"{name}.png").read_bytes()
    assert (a / "depth" / f"{name}.png").read_bytes() == (b / "depth" / f"{name}.png").read_bytes()


def test_cli_config_file_and_flag_precedence(tmp_path):
    _write_polygon_scene(tmp_path)
    cfg = tmp_path / "roadchar.cfg"
    cfg.write_text("min_valid_fraction = 0.9\nband_radius = 10\n")

    # a config demanding 90% coverage fails on the speckled region
    speckled = tmp_path / "depth"
    depth = read_depth(speckled / "poly0.png")
    data = depth.data.copy()
    rng = np.random.default_rng(0)
    blank = rng.random(data.shape) < 0.5
    data[blank] = 0
    write_depth(speckled / "poly0.png", DepthMap(data))

    out1 = tmp_path / "strict"
    main([
        "characterize", "--config", str(cfg),
        "--frames", str(tmp_path / "rgb"), "--preds", str(tmp_path / "preds"),
        "--depths", str(tmp_path / "depth"), "--out", str(out1),
    ])
    report = parse_report((out1 / "reports" / "poly0.json").read_text())
    assert report.potholes[0].depth_stats is None  # coverage below 0.9

    out2 = tmp_path / "lenient"
    main([
        "characterize", "--config", str(cfg), "--min-valid-fraction", "0.1",
        "--frames", str(tmp_path / "rgb"), "--preds", str(tmp_path / "preds"),
        "--depths", str(tmp_path / "depth"), "--out", str(out2),
    ])
    report = parse_report((out2 / "reports" / "poly0.json").read_text())
    assert report.potholes[0].depth_stats is not None  # flag beats config file


def test_installed_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "roadchar.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "characterize" in proc.stdout
