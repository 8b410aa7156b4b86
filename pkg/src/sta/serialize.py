"""JSON model files.

Floats are written with 17 significant digits, which round-trips IEEE doubles
exactly, and the text is fully determined by the parameters (no timestamps,
fixed key order) so equal models give byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .core import GridTopology, StaModel
from .errors import (
    InvalidArgumentError,
    ModelNotFoundError,
    ModelParseError,
    ModelShapeError,
    ModelVersionError,
)

FORMAT_VERSION = 1


def _num(x: float) -> str:
    s = format(float(x), ".17g")
    # keep integral values (and -0.0) as JSON floats
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _vec(v) -> str:
    return "[" + ",".join(_num(x) for x in v) + "]"


def _mat(m, indent: str) -> str:
    if len(m) == 0:
        return "[]"
    rows = (",\n" + indent + "  ").join(_vec(r) for r in m)
    return "[\n" + indent + "  " + rows + "\n" + indent + "]"


def dumps_model(model: StaModel) -> str:
    norm = "null"
    if model.norm_min is not None and model.norm_max is not None:
        norm = '{"min": %s, "max": %s}' % (_vec(model.norm_min), _vec(model.norm_max))
    parts = [
        ('"format_version"', str(FORMAT_VERSION)),
        ('"grid"', '{"rows": %d, "cols": %d}' % (model.grid.rows, model.grid.cols)),
        ('"sigma_rbf"', _num(model.sigma_rbf)),
        ('"input_dim"', str(model.input_dim)),
        ('"num_classes"', str(model.num_classes)),
        ('"class_names"', json.dumps(list(model.class_names))),
        ('"normalization"', norm),
        ('"W"', _mat(model.W, "  ")),
        ('"V_dec"', _mat(model.V_dec, "  ")),
        ('"V_cls"', _mat(model.V_cls, "  ")),
    ]
    return "{\n" + ",\n".join(f"  {k}: {v}" for k, v in parts) + "\n}\n"


def model_fingerprint(model: StaModel) -> str:
    return hashlib.sha256(dumps_model(model).encode()).hexdigest()[:16]


def save_model(model: StaModel, path) -> Path:
    path = Path(path)
    text = dumps_model(model)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return path


def _matrix(doc, key, rows, cols) -> np.ndarray:
    raw = doc.get(key)
    if not isinstance(raw, list):
        raise ModelShapeError(f"{key} must be an array of arrays")
    if cols == 0 and raw in ([], [[]] * rows):
        return np.zeros((rows, 0))
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelShapeError(f"{key} is not a rectangular numeric matrix: {exc}") from None
    if arr.shape != (rows, cols):
        raise ModelShapeError(f"{key} has shape {arr.shape}, expected {(rows, cols)}")
    return arr


def loads_model(text: str) -> StaModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelParseError("model file must hold a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format_version {version!r}, expected {FORMAT_VERSION}")
    try:
        grid = GridTopology(int(doc["grid"]["rows"]), int(doc["grid"]["cols"]))
        d = int(doc["input_dim"])
        c = int(doc["num_classes"])
        sigma_rbf = float(doc["sigma_rbf"])
        class_names = tuple(doc.get("class_names") or ())
    except (KeyError, TypeError, ValueError, InvalidArgumentError) as exc:
        raise ModelParseError(f"model header is incomplete or invalid: {exc}") from None
    n = grid.n_units
    W = _matrix(doc, "W", n, d)
    V_dec = _matrix(doc, "V_dec", n, d)
    V_cls = _matrix(doc, "V_cls", n, c)
    norm_min = norm_max = None
    norm = doc.get("normalization")
    if norm is not None:
        try:
            norm_min = np.array(norm["min"], dtype=float)
            norm_max = np.array(norm["max"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelParseError(f"bad normalization block: {exc}") from None
    try:
        return StaModel(grid, W, V_dec, V_cls, sigma_rbf, class_names, norm_min, norm_max)
    except InvalidArgumentError as exc:
        raise ModelShapeError(str(exc)) from None


def load_model(path) -> StaModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ModelNotFoundError(f"model file not found: {path}") from None
    return loads_model(text)
