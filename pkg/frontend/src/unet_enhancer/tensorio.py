"""Standalone reader/writer for the toolkit's on-disk interfaces.

The enhancer talks to the simulation toolkit only through files: TNSR tensor
containers and the dataset manifest JSON.  Both formats are small enough to
reimplement here (by design), keeping the two packages decoupled.

TNSR: "TNSR" magic, u16 version (1), u8 dtype (0 = float32, 1 = complex64),
u8 rank, u32 dims, row-major little-endian payload, no padding.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

_MAGIC = b"TNSR"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<c8")}


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a TNSR file")
    version, code, rank = struct.unpack("<HBB", raw[4:8])
    if version != 1 or code not in _DTYPES:
        raise ValueError(f"{path}: unsupported TNSR version/dtype {version}/{code}")
    dims = struct.unpack(f"<{rank}I", raw[8 : 8 + 4 * rank])
    dtype = _DTYPES[code]
    payload = raw[8 + 4 * rank :]
    if len(payload) != int(np.prod(dims)) * dtype.itemsize:
        raise ValueError(f"{path}: TNSR payload length mismatch")
    return np.frombuffer(payload, dtype=dtype).reshape(dims).copy()


def write_tensor(path, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr)
    if arr.dtype == np.float32:
        code = 0
    elif arr.dtype == np.complex64:
        code = 1
    else:
        raise ValueError(f"TNSR stores float32/complex64, got {arr.dtype}")
    header = _MAGIC + struct.pack("<HBB", 1, code, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + dims + arr.tobytes(order="C"))


def load_manifest(path) -> dict:
    manifest = json.loads(Path(path).read_text())
    for key in ("kind", "grid", "N", "delta", "count", "split", "files"):
        if key not in manifest:
            raise ValueError(f"{path}: manifest is missing key {key!r}")
    return manifest


def manifest_rows(manifest: dict, manifest_path, split: str):
    """(input_path, target_path) pairs for 'train', 'test', or 'all'."""
    base = Path(manifest_path).parent
    rows = manifest["files"]
    n_train = manifest["split"]["train"]
    if split == "train":
        rows = rows[:n_train]
    elif split == "test":
        rows = rows[n_train:]
    elif split != "all":
        raise ValueError(f"unknown split {split!r}")
    return [(base / r["input"], base / r["target"]) for r in rows]
