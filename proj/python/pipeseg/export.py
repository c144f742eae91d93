"""Export model predictions to the toolkit's prediction JSON schema.

Only the file format is shared with the evaluator; nothing here imports the extension module.

A predictor is any callable taking an HxWx3 uint8 array and returning an iterable of
(class_id, confidence, mask) tuples, where mask is an HxW array at the image's native size.
"""

from __future__ import annotations

import argparse
import dataclasses
import importlib
import json
import sys
from pathlib import Path
from typing import Callable, Iterable, Tuple

import numpy as np

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff"}

Detection = Tuple[int, float, np.ndarray]
Predictor = Callable[[np.ndarray], Iterable[Detection]]


class ModelLoadError(RuntimeError):
    pass


@dataclasses.dataclass
class ExportJob:
    model_ref: str
    image_dir: Path
    out_dir: Path
    conf_floor: float = 0.01

    def __post_init__(self):
        self.image_dir = Path(self.image_dir)
        self.out_dir = Path(self.out_dir)
        if not 0.0 <= self.conf_floor < 1.0:
            raise ValueError(f"conf_floor must be in [0, 1), got {self.conf_floor}")


@dataclasses.dataclass
class ExportReport:
    written: list = dataclasses.field(default_factory=list)
    failed: list = dataclasses.field(default_factory=list)  # (image name, reason)

    @property
    def ok(self) -> bool:
        return not self.failed


def encode_rle(mask: np.ndarray) -> list:
    """Row-major run lengths, starting with a (possibly empty) background run."""
    flat = np.asarray(mask).astype(bool).ravel()
    if flat.size == 0:
        return []
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(edges).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def decode_rle(counts, width: int, height: int) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.int64)
    if counts.sum() != width * height:
        raise ValueError(f"RLE counts sum to {counts.sum()}, expected {width * height}")
    values = np.arange(counts.size) % 2 == 1
    return np.repeat(values, counts).reshape(height, width)


def list_images(image_dir: Path) -> list:
    return sorted(p for p in Path(image_dir).iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def read_rgb(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def prediction_document(name: str, width: int, height: int, detections: Iterable[Detection], conf_floor: float) -> dict:
    instances = []
    for class_id, confidence, mask in detections:
        confidence = float(confidence)
        if not np.isfinite(confidence) or confidence > 1.0:
            raise ValueError(f"confidence {confidence} outside [0, 1]")
        if confidence < conf_floor:
            continue
        mask = np.asarray(mask)
        if mask.shape != (height, width):
            raise ValueError(f"mask shape {mask.shape} does not match image {height}x{width}")
        instances.append({"class_id": int(class_id), "confidence": confidence, "rle": encode_rle(mask)})
    return {"image": name, "width": width, "height": height, "instances": instances}


def export_predictions(job: ExportJob, predictor: Predictor) -> ExportReport:
    job.out_dir.mkdir(parents=True, exist_ok=True)
    report = ExportReport()
    for path in list_images(job.image_dir):
        try:
            rgb = read_rgb(path)
            height, width = rgb.shape[:2]
            doc = prediction_document(path.name, width, height, predictor(rgb), job.conf_floor)
        except Exception as exc:  # recorded per image, the batch keeps going
            report.failed.append((path.name, str(exc)))
            continue
        out = job.out_dir / (path.stem + ".json")
        out.write_text(json.dumps(doc) + "\n")
        report.written.append(out)
    return report


def _ultralytics_predictor(model_ref: str, conf_floor: float) -> Predictor:
    from ultralytics import YOLO

    model = YOLO(model_ref)

    def predict(rgb: np.ndarray):
        result = model.predict(rgb[:, :, ::-1], conf=conf_floor, retina_masks=True, verbose=False)[0]
        if result.masks is None:
            return []
        masks = result.masks.data.cpu().numpy() > 0.5
        classes = result.boxes.cls.cpu().numpy().astype(int)
        confs = result.boxes.conf.cpu().numpy()
        return list(zip(classes, confs, masks))

    return predict


def load_predictor(model_ref: str, conf_floor: float = 0.01) -> Predictor:
    """`package.module:factory` calls factory(); anything else is treated as an ultralytics checkpoint."""
    try:
        if ":" in model_ref and not Path(model_ref).exists():
            module_name, attr = model_ref.split(":", 1)
            return getattr(importlib.import_module(module_name), attr)()
        if not Path(model_ref).exists():
            raise FileNotFoundError(f"no such checkpoint: {model_ref}")
        return _ultralytics_predictor(model_ref, conf_floor)
    except Exception as exc:
        raise ModelLoadError(f"cannot load model '{model_ref}': {exc}") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m pipeseg.export", description=__doc__.splitlines()[0])
    parser.add_argument("--model", required=True, help="checkpoint path or module:factory")
    parser.add_argument("--images", required=True, type=Path)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--conf-floor", type=float, default=0.01)
    args = parser.parse_args(argv)

    try:
        job = ExportJob(args.model, args.images, args.out, args.conf_floor)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        predictor = load_predictor(job.model_ref, job.conf_floor)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    report = export_predictions(job, predictor)
    for name, reason in report.failed:
        print(f"failed: {name}: {reason}", file=sys.stderr)
    print(f"exported {len(report.written)} prediction files, {len(report.failed)} failed")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
