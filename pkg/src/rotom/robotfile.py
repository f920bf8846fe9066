"""JSON robot description files.

Layout::

    {
      "name": "pendulum",
      "task_dim": 2,
      "base_frame": {"rotation": [[1,0,0],[0,1,0],[0,0,1]], "translation": [0,0,0]},
      "joints": [{"axis": [0,0,1], "origin": [0,0,0], "limits": [-3.14, 3.14]}],
      "links":  [{"mass": 1.0, "com": [1,0,0], "inertia": [[...],[...],[...]]}]
    }

``base_frame``, ``limits`` and ``inertia`` are optional. Unknown keys are
rejected with an error naming the key.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .chain import ChainModel, JointSpec, LinkSpec
from .errors import SchemaError

_TOP_KEYS = {"name", "task_dim", "base_frame", "joints", "links"}
_REQUIRED_TOP = {"name", "task_dim", "joints", "links"}
_BASE_KEYS = {"rotation", "translation"}
_JOINT_KEYS = {"axis", "origin", "limits"}
_LINK_KEYS = {"mass", "com", "inertia"}


def _check_keys(obj, allowed: set, required: set, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r} in {where}")
    for key in sorted(required - obj.keys()):
        raise SchemaError(f"missing key {key!r} in {where}")


def model_from_dict(data: dict) -> ChainModel:
    _check_keys(data, _TOP_KEYS, _REQUIRED_TOP, "robot description")
    if not isinstance(data["joints"], list) or not isinstance(data["links"], list):
        raise SchemaError("'joints' and 'links' must be arrays")
    base = np.eye(4)
    if "base_frame" in data:
        bf = data["base_frame"]
        _check_keys(bf, _BASE_KEYS, set(), "base_frame")
        if "rotation" in bf:
            R = np.array(bf["rotation"], dtype=float)
            if R.shape != (3, 3):
                raise SchemaError("base_frame.rotation must be 3x3")
            base[:3, :3] = R
        if "translation" in bf:
            t = np.array(bf["translation"], dtype=float)
            if t.shape != (3,):
                raise SchemaError("base_frame.translation must be a 3-vector")
            base[:3, 3] = t
    joints = []
    for i, jd in enumerate(data["joints"]):
        _check_keys(jd, _JOINT_KEYS, {"axis"}, f"joints[{i}]")
        limits = jd.get("limits")
        if limits is not None and (not isinstance(limits, list) or len(limits) != 2):
            raise SchemaError(f"joints[{i}].limits must be [lower, upper]")
        joints.append(JointSpec(jd["axis"], jd.get("origin", [0.0, 0.0, 0.0]),
                                None if limits is None else tuple(limits)))
    links = []
    for i, ld in enumerate(data["links"]):
        _check_keys(ld, _LINK_KEYS, {"mass"}, f"links[{i}]")
        if isinstance(ld["mass"], bool) or not isinstance(ld["mass"], (int, float)):
            raise SchemaError(f"links[{i}].mass must be a number")
        links.append(LinkSpec(ld["mass"], ld.get("com", [0.0, 0.0, 0.0]), ld.get("inertia")))
    task_dim = data["task_dim"]
    if isinstance(task_dim, bool) or not isinstance(task_dim, int):
        raise SchemaError("task_dim must be the integer 2 or 3")
    name = data["name"]
    if not isinstance(name, str):
        raise SchemaError("name must be a string")
    return ChainModel(tuple(joints), tuple(links), task_dim, base, name)


def _floats(arr) -> list:
    return np.asarray(arr, dtype=float).tolist()


def model_to_dict(model: ChainModel) -> dict:
    out: dict = {"name": model.name, "task_dim": model.task_dim}
    if not np.array_equal(model.base_frame, np.eye(4)):
        out["base_frame"] = {
            "rotation": _floats(model.base_frame[:3, :3]),
            "translation": _floats(model.base_frame[:3, 3]),
        }
    joints = []
    for j in model.joints:
        jd = {"axis": _floats(j.axis), "origin": _floats(j.origin)}
        if j.limits is not None:
            jd["limits"] = [float(j.limits[0]), float(j.limits[1])]
        joints.append(jd)
    links = []
    for lk in model.links:
        ld = {"mass": float(lk.mass), "com": _floats(lk.com)}
        if lk.inertia is not None:
            ld["inertia"] = _floats(lk.inertia)
        links.append(ld)
    out["joints"] = joints
    out["links"] = links
    return out


def dumps_model(model: ChainModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def loads_model(text: str) -> ChainModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return model_from_dict(data)


def load_model(path) -> ChainModel:
    return loads_model(Path(path).read_text())


def save_model(model: ChainModel, path) -> None:
    Path(path).write_text(dumps_model(model))
