"""Checkpoint container: exact round-trip, namespacing, determinism."""

import json

import numpy as np
import pytest

from hapticrep.checkpoint import (FORMAT_VERSION, load_checkpoint,
                                  restore_into, save_checkpoint)
from hapticrep.tensor import Tensor


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    params = {"a.weight": Tensor(rng.standard_normal((3, 2))),
              "a.bias": Tensor(rng.standard_normal(2)),
              "scalar": Tensor(np.array(1.2345678901234567))}
    path = tmp_path / "m.ckpt"
    save_checkpoint(str(path), params, seed=7, hyperparameters={"d": 3})
    loaded, seed, hyper = load_checkpoint(str(path))
    assert seed == 7 and hyper == {"d": 3}
    for name, t in params.items():
        np.testing.assert_array_equal(loaded[name], t.value)


def test_save_is_byte_deterministic(tmp_path):
    params = {"w": Tensor(np.linspace(0, 1, 7))}
    p1, p2 = tmp_path / "a", tmp_path / "b"
    save_checkpoint(str(p1), params, seed=1)
    save_checkpoint(str(p2), params, seed=1)
    assert p1.read_bytes() == p2.read_bytes()


def test_rejects_foreign_file(tmp_path):
    path = tmp_path / "x.json"
    path.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError):
        load_checkpoint(str(path))


def test_rejects_future_version(tmp_path):
    path = tmp_path / "x.json"
    path.write_text(json.dumps({"format": "hapticrep-checkpoint",
                                "version": FORMAT_VERSION + 1, "params": {}}))
    with pytest.raises(ValueError):
        load_checkpoint(str(path))


def test_restore_into_namespace(tmp_path):
    src = Tensor(np.array([1.0, 2.0]))
    path = tmp_path / "m.ckpt"
    save_checkpoint(str(path), {"net.w": src})
    params, _, _ = load_checkpoint(str(path))
    dst = Tensor(np.zeros(2))
    restore_into({"w": dst}, params, "net")
    np.testing.assert_array_equal(dst.value, [1.0, 2.0])


def test_restore_missing_parameter(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(str(path), {"net.w": Tensor(np.zeros(2))})
    params, _, _ = load_checkpoint(str(path))
    with pytest.raises(KeyError):
        restore_into({"other": Tensor(np.zeros(2))}, params, "net")


def test_restore_shape_mismatch(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(str(path), {"net.w": Tensor(np.zeros(2))})
    params, _, _ = load_checkpoint(str(path))
    with pytest.raises(ValueError):
        restore_into({"w": Tensor(np.zeros(3))}, params, "net")
