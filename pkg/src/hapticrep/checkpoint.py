"""Versioned checkpoint files for model parameters.

A checkpoint is a JSON document mapping parameter names to their shape
and row-major little-endian float64 payload (base64). The seed and
hyperparameters used to build the model travel with it so a run can be
replayed.
"""

from __future__ import annotations

import base64
import json

import numpy as np

FORMAT_VERSION = 1


def save_checkpoint(path, params, seed=None, hyperparameters=None):
    """Write ``params`` (mapping name -> Tensor or ndarray) to ``path``."""
    blob = {
        "format": "hapticrep-checkpoint",
        "version": FORMAT_VERSION,
        "seed": seed,
        "hyperparameters": hyperparameters or {},
        "params": {},
    }
    for name, p in params.items():
        arr = np.asarray(getattr(p, "value", p), dtype=np.float64)
        blob["params"][name] = {
            "shape": list(arr.shape),
            "data": base64.b64encode(arr.astype("<f8").tobytes()).decode("ascii"),
        }
    with open(path, "w") as fh:
        json.dump(blob, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    """Read a checkpoint; returns (params dict, seed, hyperparameters)."""
    with open(path) as fh:
        blob = json.load(fh)
    if blob.get("format") != "hapticrep-checkpoint":
        raise ValueError("%s is not a hapticrep checkpoint" % path)
    if blob.get("version") != FORMAT_VERSION:
        raise ValueError("unsupported checkpoint version %r" % blob.get("version"))
    params = {}
    for name, rec in blob["params"].items():
        arr = np.frombuffer(base64.b64decode(rec["data"]), dtype="<f8")
        params[name] = arr.reshape(rec["shape"]).astype(np.float64)
    return params, blob.get("seed"), blob.get("hyperparameters", {})


def restore_into(tensors, params, namespace=""):
    """Copy loaded arrays into live Tensors (name -> Tensor mapping)."""
    prefix = namespace + "." if namespace else ""
    for name, t in tensors.items():
        key = prefix + name
        if key not in params:
            raise KeyError("checkpoint missing parameter %r" % key)
        arr = params[key]
        if arr.shape != t.value.shape:
            raise ValueError("parameter %r shape %s does not match model %s"
                             % (key, arr.shape, t.value.shape))
        t.value[...] = arr
