import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

import pipeseg
from pipeseg import export

RNG_SEED = 7


def random_mask(rng, h, w, density=0.3):
    return rng.random((h, w)) < density


def brute_hausdorff(p, g):
    bp, bg = pipeseg.extract_boundary(p), pipeseg.extract_boundary(g)
    d = np.sqrt(((bp[:, None, :] - bg[None, :, :]) ** 2).sum(-1))
    return max(d.min(1).max(), d.min(0).max())


def test_metrics_match_counts_and_oracle():
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(50):
        h, w = rng.integers(2, 20, size=2)
        p, g = random_mask(rng, h, w), random_mask(rng, h, w)
        inter, union = (p & g).sum(), (p | g).sum()
        if union == 0:
            continue
        assert pipeseg.iou(p, g) == pytest.approx(inter / union, abs=1e-15)
        assert pipeseg.dice(p, g) == pytest.approx(2 * inter / (p.sum() + g.sum()), abs=1e-15)
        d = pipeseg.dice(p, g)
        i = pipeseg.iou(p, g)
        assert d == pytest.approx(2 * i / (1 + i), abs=1e-12)
        if p.any() and g.any():
            assert pipeseg.hausdorff(p, g) == pytest.approx(brute_hausdorff(p, g), abs=1e-9)


def test_evaluate_pair_and_aggregate():
    gt = np.zeros((4, 4), bool)
    gt[0, :] = True
    pred = np.zeros((4, 4), bool)
    pred[0:2, 0:3] = True
    rec = pipeseg.evaluate_pair(pred, gt, "a")
    assert rec["intersection_pixels"] == 3
    assert rec["pred_pixels"] == 6 and rec["gt_pixels"] == 4
    agg = pipeseg.aggregate([rec])
    assert agg["image_count"] == 1
    assert agg["miou"] == pytest.approx(rec["iou"])
    with pytest.raises(pipeseg.DimensionMismatch):
        pipeseg.evaluate_pair(np.zeros((4, 5), bool), gt)


def test_distance_transform_is_exact():
    rng = np.random.default_rng(RNG_SEED)
    seeds = random_mask(rng, 17, 23, 0.05)
    seeds[3, 4] = True
    dt = pipeseg.distance_transform(seeds)
    ys, xs = np.nonzero(seeds)
    yy, xx = np.mgrid[0:17, 0:23]
    brute = np.sqrt(((yy[..., None] - ys) ** 2 + (xx[..., None] - xs) ** 2).min(-1))
    np.testing.assert_allclose(dt, brute, atol=1e-12)


def test_rle_conventions_agree_between_exporter_and_core():
    rng = np.random.default_rng(RNG_SEED)
    for shape in [(1, 1), (3, 5), (16, 9), (32, 32)]:
        for density in (0.0, 0.4, 1.0):
            m = random_mask(rng, *shape, density)
            counts = export.encode_rle(m)
            assert counts == pipeseg.encode_rle(m)
            assert sum(counts) == m.size
            np.testing.assert_array_equal(pipeseg.decode_rle(counts, shape[1], shape[0]), m)
            np.testing.assert_array_equal(export.decode_rle(counts, shape[1], shape[0]), m)


def test_rasterize_polygon_pixel_centres():
    m = pipeseg.rasterize_polygon([(1, 1), (4, 1), (4, 3), (1, 3)], 6, 5)
    expected = np.zeros((5, 6), bool)
    expected[1:3, 1:4] = True
    np.testing.assert_array_equal(m, expected)


def test_enhancement_shapes_and_modes(tmp_path):
    rng = np.random.default_rng(RNG_SEED)
    img = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
    for mode in ("original", "clahe", "clahe_gamma", "dcpd"):
        out = pipeseg.enhance(img, mode)
        assert out.shape == img.shape and out.dtype == np.uint8
    np.testing.assert_array_equal(pipeseg.enhance(img, "original"), img)
    gray = img[:, :, 0].copy()
    assert pipeseg.clahe(gray, 2, 2, 3.0).shape == gray.shape
    with pytest.raises(ValueError):
        pipeseg.enhance(img, "sharpen")
    pipeseg.save_image(img, tmp_path / "x.png")
    np.testing.assert_array_equal(pipeseg.load_image(tmp_path / "x.png"), img)


def test_split_and_labels():
    assert pipeseg.split_sizes(647) == (388, 129, 130)
    inst = pipeseg.parse_yolo_seg_label("0 0.1 0.1 0.5 0.1 0.5 0.5\n", 100, 200)
    assert inst[0][0] == 0
    assert inst[0][1][1] == pytest.approx((50.0, 20.0))
    with pytest.raises(pipeseg.ParseError):
        pipeseg.parse_yolo_seg_label("0 0.1 0.1\n", 10, 10)


def test_render_table_reproduces_stored_row():
    doc = {
        "label": "YOLOv11n",
        "model": "YOLOv11n",
        "enhancement": "Original",
        "dataset_metrics": {"miou": 0.7098, "dice": 0.8129, "hd_mean": 307.59, "mad_mean": 24.94,
                            "image_count": 130, "undefined_hd_count": 0},
        "ap": {"ap50": 0.0, "ap50_95": 0.0, "per_threshold": []},
        "best_f1": {"threshold": 0.5, "precision": 0.0, "recall": 0.0, "f1": 0.0},
    }
    t = pipeseg.render_table([doc])
    assert "| YOLOv11n | 0.7098 | 0.8129 | 307.59 | 24.94 |" in t["markdown"]
    assert "YOLOv11n,0.7098,0.8129,307.59,24.94" in t["csv"]


# --- dataset + exporter integration -------------------------------------------------


def make_source(root: Path, n=10, size=(48, 40)):
    w, h = size
    (root / "images").mkdir(parents=True)
    (root / "labels").mkdir()
    rng = np.random.default_rng(RNG_SEED)
    for i in range(n):
        img = np.zeros((h, w, 3), np.uint8)
        lines = []
        if i % 4 != 3:
            x0, y0 = rng.integers(2, 15, size=2)
            x1, y1 = x0 + rng.integers(8, 20), y0 + rng.integers(8, 18)
            img[y0:y1, x0:x1] = 255
            poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            lines.append("0 " + " ".join(f"{x / w:.6f} {y / h:.6f}" for x, y in poly))
        Image.fromarray(img).save(root / "images" / f"frame_{i:03d}.png")
        (root / "labels" / f"frame_{i:03d}.txt").write_text("\n".join(lines) + ("\n" if lines else ""))


def threshold_predictor(rgb):
    mask = rgb.mean(axis=2) > 128
    return [(0, 0.9, mask), (0, 0.001, mask)] if mask.any() else []


@pytest.fixture()
def dataset(tmp_path):
    make_source(tmp_path / "src")
    info = pipeseg.prepare(tmp_path / "src", tmp_path / "ds")
    assert info["ingested"] == 10
    return tmp_path / "ds"


def test_export_contract(dataset, tmp_path):
    job = export.ExportJob("stub", dataset / "images", tmp_path / "preds", conf_floor=0.01)
    report = export.export_predictions(job, threshold_predictor)
    assert report.ok
    images = export.list_images(dataset / "images")
    files = sorted((tmp_path / "preds").glob("*.json"))
    assert len(files) == len(images) == 10
    for f in files:
        text = f.read_text()
        info = pipeseg.parse_prediction_json(text)
        doc = json.loads(text)
        for inst in doc["instances"]:
            assert job.conf_floor <= inst["confidence"] <= 1.0
            assert sum(inst["rle"]) == info["width"] * info["height"]
            m = pipeseg.decode_rle(inst["rle"], info["width"], info["height"])
            assert pipeseg.encode_rle(m) == inst["rle"]
    empties = [f for f in files if not json.loads(f.read_text())["instances"]]
    assert empties, "frames without objects must still produce a file"


def test_export_records_per_image_failures(dataset, tmp_path):
    calls = {"n": 0}

    def flaky(rgb):
        calls["n"] += 1
        if calls["n"] == 2:
            raise RuntimeError("inference failed")
        return threshold_predictor(rgb)

    report = export.export_predictions(export.ExportJob("stub", dataset / "images", tmp_path / "p"), flaky)
    assert not report.ok and len(report.failed) == 1
    assert len(report.written) == 9
    with pytest.raises(ValueError):
        export.ExportJob("stub", dataset / "images", tmp_path / "p", conf_floor=1.0)


def test_evaluate_exported_predictions(dataset, tmp_path):
    export.export_predictions(export.ExportJob("stub", dataset / "images", tmp_path / "preds"), threshold_predictor)
    result = pipeseg.evaluate(dataset / "manifest.json", tmp_path / "preds", tmp_path / "eval")
    m = result["dataset_metrics"]
    assert m["image_count"] == 2
    assert 0.0 <= m["miou"] <= m["dice"] <= 1.0
    assert m["hd_mean"] >= 0.0 and m["mad_mean"] >= 0.0
    assert 0.0 <= result["ap"]["ap50_95"] <= 1.0
    assert (tmp_path / "eval" / "result.json").exists()


def run(cmd, **kw):
    return subprocess.run(cmd, capture_output=True, text=True, **kw)


def test_export_cli_end_to_end(dataset, tmp_path):
    (tmp_path / "stubmod").mkdir()
    (tmp_path / "stubmod" / "stub_model.py").write_text(
        "import numpy as np\n"
        "def make():\n"
        "    def predict(rgb):\n"
        "        m = rgb.mean(axis=2) > 128\n"
        "        return [(0, 0.8, m)] if m.any() else []\n"
        "    return predict\n"
    )
    env = dict(os.environ)
    env["PYTHONPATH"] = os.pathsep.join([str(tmp_path / "stubmod"), env.get("PYTHONPATH", "")])
    base = [sys.executable, "-m", "pipeseg.export", "--images", str(dataset / "images"), "--out", str(tmp_path / "preds")]

    bad = run(base + ["--model", str(tmp_path / "missing.pt")], env=env)
    assert bad.returncode != 0
    assert "cannot load model" in bad.stderr

    ok = run(base + ["--model", "stub_model:make"], env=env)
    assert ok.returncode == 0, ok.stderr
    assert len(list((tmp_path / "preds").glob("*.json"))) == 10

    cli = os.environ.get("PIPESEG_CLI")
    if not cli:
        pytest.skip("PIPESEG_CLI not set")
    ev = run([cli, "evaluate", str(dataset / "manifest.json"), str(tmp_path / "preds"), "--out", str(tmp_path / "ev")])
    assert ev.returncode == 0, ev.stderr
    assert "mIoU=" in ev.stdout
    doc = json.loads((tmp_path / "ev" / "result.json").read_text())
    assert 0.0 <= doc["dataset_metrics"]["miou"] <= 1.0
