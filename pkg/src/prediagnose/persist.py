"""Versioned canonical-JSON model persistence (.pdmodel.json).

Canonical form: fixed field order, reals as decimal text with 17 significant
digits, so model equality is byte equality and doubles round-trip exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import FormatError
from .forest import ForestHyperparams, ForestModel, TreeNode
from .svm import SvmModel

FORMAT_VERSION = 1
FILE_SUFFIX = ".pdmodel.json"


class PersistError(FormatError):
    """Schema violation, unknown kind, or unsupported version."""


# ---------------------------------------------------------------------------
# canonical JSON writer (stdlib json cannot pin float formatting)


def _canon(obj) -> str:
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(k)}: {_canon(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"leaf": [int(node.counts[0]), int(node.counts[1])]}
    return {
        "feature": int(node.feature),
        "threshold": float(node.threshold),
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _expect(mapping, key, types, path):
    if not isinstance(mapping, dict) or key not in mapping:
        raise PersistError(f"missing field {path}.{key}")
    value = mapping[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise PersistError(f"field {path}.{key} has wrong type {type(value).__name__}")
    return value


def _tree_from_dict(obj, path) -> TreeNode:
    if not isinstance(obj, dict):
        raise PersistError(f"field {path} must be an object")
    if "leaf" in obj:
        leaf = obj["leaf"]
        if not (isinstance(leaf, list) and len(leaf) == 2 and all(isinstance(v, int) for v in leaf)):
            raise PersistError(f"field {path}.leaf must be [n0, n1]")
        return TreeNode(counts=(leaf[0], leaf[1]))
    feature = _expect(obj, "feature", int, path)
    threshold = float(_expect(obj, "threshold", (int, float), path))
    left = _tree_from_dict(_expect(obj, "left", dict, path), f"{path}.left")
    right = _tree_from_dict(_expect(obj, "right", dict, path), f"{path}.right")
    return TreeNode(feature=feature, threshold=threshold, left=left, right=right)


def model_kind(model) -> str:
    if isinstance(model, SvmModel):
        return "svm"
    if isinstance(model, ForestModel):
        return "forest"
    raise PersistError(f"unknown model type {type(model).__name__}")


def save_model(model, created_with: dict | None = None) -> bytes:
    kind = model_kind(model)
    if kind == "svm":
        payload = {
            "gamma": float(model.gamma),
            "c": float(model.c),
            "bias": float(model.bias),
            "alpha_y": [float(v) for v in model.alpha_y],
            "support_vectors": [[float(v) for v in row] for row in model.support_vectors],
        }
    else:
        hp = model.hyperparams
        payload = {
            "n_features": int(model.n_features),
            "hyperparams": {
                "n_trees": int(hp.n_trees),
                "max_depth": int(hp.max_depth),
                "min_samples_leaf": int(hp.min_samples_leaf),
                "mtry": None if hp.mtry is None else int(hp.mtry),
                "seed": int(hp.seed),
            },
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    envelope = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "created_with": created_with or {},
        "payload": payload,
    }
    return (_canon(envelope) + "\n").encode()


def load_model(data: bytes):
    """Returns (model, created_with)."""
    try:
        envelope = json.loads(data)
    except json.JSONDecodeError as exc:
        raise PersistError(f"invalid JSON: {exc}") from exc
    version = _expect(envelope, "format_version", int, "$")
    if version != FORMAT_VERSION:
        raise PersistError(f"unsupported format_version {version}")
    kind = _expect(envelope, "kind", str, "$")
    created_with = _expect(envelope, "created_with", dict, "$")
    payload = _expect(envelope, "payload", dict, "$")
    if kind == "svm":
        gamma = float(_expect(payload, "gamma", (int, float), "$.payload"))
        c = float(_expect(payload, "c", (int, float), "$.payload"))
        bias = float(_expect(payload, "bias", (int, float), "$.payload"))
        alpha_y = _expect(payload, "alpha_y", list, "$.payload")
        sv = _expect(payload, "support_vectors", list, "$.payload")
        if len(sv) != len(alpha_y):
            raise PersistError("$.payload.support_vectors length mismatch with alpha_y")
        for i, row in enumerate(sv):
            if not isinstance(row, list):
                raise PersistError(f"field $.payload.support_vectors[{i}] must be a list")
        model = SvmModel(
            support_vectors=np.array(sv, dtype=np.float64).reshape(len(sv), -1),
            alpha_y=np.array(alpha_y, dtype=np.float64),
            bias=bias,
            gamma=gamma,
            c=c,
        )
        return model, created_with
    if kind == "forest":
        n_features = _expect(payload, "n_features", int, "$.payload")
        hp_obj = _expect(payload, "hyperparams", dict, "$.payload")
        mtry = hp_obj.get("mtry")
        if mtry is not None and not isinstance(mtry, int):
            raise PersistError("field $.payload.hyperparams.mtry has wrong type")
        hp = ForestHyperparams(
            n_trees=_expect(hp_obj, "n_trees", int, "$.payload.hyperparams"),
            max_depth=_expect(hp_obj, "max_depth", int, "$.payload.hyperparams"),
            min_samples_leaf=_expect(hp_obj, "min_samples_leaf", int, "$.payload.hyperparams"),
            mtry=mtry,
            seed=_expect(hp_obj, "seed", int, "$.payload.hyperparams"),
        )
        trees_obj = _expect(payload, "trees", list, "$.payload")
        trees = [_tree_from_dict(t, f"$.payload.trees[{i}]") for i, t in enumerate(trees_obj)]
        model = ForestModel(trees=trees, n_features=n_features, hyperparams=hp)
        return model, created_with
    raise PersistError(f"unknown model kind {kind!r}")


def save_model_file(path, model, created_with: dict | None = None) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    data = save_model(model, created_with)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model_file(path):
    with open(path, "rb") as fh:
        return load_model(fh.read())
