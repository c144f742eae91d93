"""Segmentation evaluation toolkit: metrics, enhancement and dataset preparation."""

import json as _json

from ._pipeseg import (
    DataError,
    DimensionMismatch,
    Error,
    ImageIoError,
    ParseError,
    aggregate,
    clahe,
    decode_rle,
    dehaze,
    dice,
    distance_transform,
    encode_rle,
    enhance,
    evaluate_pair,
    extract_boundary,
    gamma_correct,
    hausdorff,
    iou,
    load_image,
    luma,
    mad,
    parse_prediction_json,
    parse_yolo_seg_label,
    prepare,
    rasterize_polygon,
    resize_bilinear,
    save_image,
    split_sizes,
    validate_manifest,
)
from . import _pipeseg


def evaluate(manifest, pred_dir, output_dir="", **kwargs):
    """Evaluates predictions on the test split and returns the result document as a dict."""
    return _json.loads(_pipeseg.evaluate(str(manifest), str(pred_dir), str(output_dir), **kwargs))


def render_table(results, style="table2", sort=False):
    """Renders result dicts (or JSON strings) as {"markdown", "csv", "latex"}."""
    docs = [r if isinstance(r, str) else _json.dumps(r) for r in results]
    return _pipeseg.render_table(docs, style, sort)


__all__ = [name for name in dir() if not name.startswith("_")]
