# -*- coding: utf-8 -*-
"""
core.learners.serialization

Versioned JSON model files. Arrays are stored base64-encoded as
little-endian float32 (int32 for index arrays); scalars stay JSON numbers.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np

from core.exceptions import ModelError
from core.learners.base import Model
from core.learners.boosting import GbtModel, GbtParams
from core.learners.linear import LinearModel, LinearSvmModel, LogisticModel
from core.learners.neighbors import KnnModel
from core.learners.network.model import NetworkModel, NetworkSpec, build_layers
from core.learners.tree import ForestModel, TreeModel, TreeStructure
from core.logger import logger

MODEL_FORMAT = "thermoscan-model"
MODEL_VERSION = 1


def _encode(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        dtype = "<i4" if np.issubdtype(value.dtype, np.integer) else "<f4"
        return {
            "__tensor__": dtype,
            "shape": list(value.shape),
            "data": base64.b64encode(np.ascontiguousarray(value, dtype=dtype).tobytes()).decode("ascii"),
        }
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _decode(value: Any) -> Any:
    if isinstance(value, dict):
        if "__tensor__" in value:
            raw = base64.b64decode(value["data"])
            arr = np.frombuffer(raw, dtype=value["__tensor__"]).reshape(value["shape"])
            return arr.astype(np.int64 if value["__tensor__"] == "<i4" else np.float64)
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def _tree(d: Dict[str, Any]) -> TreeStructure:
    return TreeStructure(**d)


def _network(p: Dict[str, Any]) -> NetworkModel:
    spec = NetworkSpec.from_dict(p["spec"])
    model = NetworkModel(spec, build_layers(spec, 0))
    model.set_weights(p["weights"])
    return model


_LOADERS: Dict[str, Callable[[Dict[str, Any]], Model]] = {
    "linear": lambda p: LinearModel(p["bias"], p["weights"]),
    "logistic": lambda p: LogisticModel(p["bias"], p["weights"]),
    "svm": lambda p: LinearSvmModel(p["bias"], p["weights"], p["platt_a"], p["platt_b"]),
    "knn": lambda p: KnnModel(p["X"], p["y"], p["k"]),
    "tree": lambda p: TreeModel(_tree(p["tree"]), p["n_features"]),
    "forest": lambda p: ForestModel([_tree(t) for t in p["trees"]], p["n_features"]),
    "gbt": lambda p: GbtModel(
        p["base_score"],
        [_tree(t) for t in p["trees"]],
        p["learning_rate"],
        p["n_features"],
        GbtParams(**p["params"]) if p.get("params") else None,
    ),
    "network": _network,
}


def save_model(model: Model, path: str | Path) -> Path:
    if model.family not in _LOADERS:
        raise ModelError(f"no serializer for model family '{model.family}'")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "family": model.family,
        "payload": _encode(model.to_dict()),
    }
    path.write_text(json.dumps(document), encoding="utf-8")
    logger.debug(f"[Model] saved {model.family} model to {path}")
    return path


def load_model(path: str | Path) -> Model:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelError(f"{path} is not a model file: {e}") from e
    if document.get("format") != MODEL_FORMAT:
        raise ModelError(f"{path} is not a model file")
    if document.get("version") != MODEL_VERSION:
        raise ModelError(f"unsupported model file version {document.get('version')}")
    family = document.get("family")
    if family not in _LOADERS:
        raise ModelError(f"unknown model family '{family}' in {path}")
    return _LOADERS[family](_decode(document["payload"]))
