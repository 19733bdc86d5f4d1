"""
CLI walkthrough
===============

Drive the whole batch surface from the command line: generate synthetic
scenes, characterize them, evaluate the (perfect) predictions, and score
the depth maps. Every subcommand is deterministic given --seed.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    cmd = [sys.executable, "-m", "roadchar.cli", *args]
    print("$ roadchar " + " ".join(args))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.stdout:
        print(proc.stdout, end="")
    if proc.returncode != 0:
        print(proc.stderr, end="")
        raise SystemExit(proc.returncode)


work = Path(tempfile.mkdtemp(prefix="roadchar-demo-"))
ds = work / "dataset"

# 1. Synthetic scenes: rgb/, depth/, labels/ (ground truth), preds/
#    (predictions with confidence), and scenes.json with expected values.
run("synth", "--out", str(ds), "--scenes", "5", "--seed", "3",
    "--width", "160", "--height", "160")

# 2. Characterize each frame from its predictions and depth map.
run("characterize",
    "--frames", str(ds / "rgb"),
    "--preds", str(ds / "preds"),
    "--depths", str(ds / "depth"),
    "--out", str(work / "characterized"),
    "--csv")

report = json.loads((work / "characterized" / "reports" / "scene0000.json").read_text())
print(f"scene0000: {report['pothole_count']} pothole(s), "
      f"damage {report['damage_percent_display']}%")

# 3. Detection metrics; the predictions equal the labels, so mAP50 is 1.
run("evaluate",
    "--labels", str(ds / "labels"),
    "--preds", str(ds / "preds"),
    "--out", str(work / "metrics"),
    "--width", "160", "--height", "160")

summary = json.loads((work / "metrics" / "summary.json").read_text())
print(f"box mAP50 = {summary['box']['mean']['ap50']}, "
      f"mask mAP50 = {summary['mask']['mean']['ap50']}")

# 4. Depth evaluation of the depth maps against themselves: mean rmse 0.
run("depth-eval",
    "--preds", str(ds / "depth"),
    "--gt", str(ds / "depth"),
    "--out", str(work / "depth-eval.json"))

print(f"artifacts left in {work}")
