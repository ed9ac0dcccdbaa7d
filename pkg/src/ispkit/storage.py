"""Bit-exact on-disk formats: the TNSR tensor container, dataset manifests,
and PGM image export.

TNSR layout (all multi-byte fields little-endian, no padding):

    offset  size  field
    0       4     magic "TNSR"
    4       2     version, u16 (currently 1)
    6       1     dtype, u8: 0 = real float32, 1 = complex64 (re, im pairs)
    7       1     rank, u8
    8       4*r   dims, u32 each
    8+4*r   ...   payload, row-major scalars

The payload length must equal prod(dims) * scalar_size exactly.  Writing
accepts only float32 / complex64 arrays so that read(write(t)) is
bit-identical to t; callers convert explicitly.

Manifests are JSON documents (schema in docs/manifest.schema.json) listing
per-sample input/target tensor files relative to the manifest's directory.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

TENSOR_MAGIC = b"TNSR"
TENSOR_VERSION = 1
MANIFEST_FORMAT_VERSION = 1

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<c8")}


def write_tensor(path, tensor: np.ndarray) -> None:
    """Write an array as a TNSR file.  Requires float32 or complex64 input."""
    arr = np.ascontiguousarray(tensor)
    if arr.dtype == np.float32:
        code = 0
    elif arr.dtype == np.complex64:
        code = 1
    else:
        raise ValidationError(
            f"tensor dtype must be float32 or complex64, got {arr.dtype}; "
            "convert explicitly before writing"
        )
    if arr.ndim < 1 or arr.ndim > 255:
        raise ValidationError(f"tensor rank must be in [1, 255], got {arr.ndim}")
    header = TENSOR_MAGIC + struct.pack("<HBB", TENSOR_VERSION, code, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes(order="C")
    Path(path).write_bytes(header + dims + payload)


def read_tensor(path) -> np.ndarray:
    """Read a TNSR file back into a numpy array (float32 or complex64)."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes) at offset 0")
    if raw[:4] != TENSOR_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r} at offset 0")
    version, code, rank = struct.unpack("<HBB", raw[4:8])
    if version != TENSOR_VERSION:
        raise FormatError(f"{path}: unsupported version {version} at offset 4")
    if code not in _DTYPE_CODES:
        raise FormatError(f"{path}: unknown dtype code {code} at offset 6")
    dims_end = 8 + 4 * rank
    if len(raw) < dims_end:
        raise FormatError(f"{path}: truncated dims at offset {len(raw)}")
    dims = struct.unpack(f"<{rank}I", raw[8:dims_end])
    dtype = _DTYPE_CODES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(raw) - dims_end != expected:
        raise FormatError(
            f"{path}: payload length {len(raw) - dims_end} != expected {expected} "
            f"at offset {dims_end}"
        )
    arr = np.frombuffer(raw[dims_end:], dtype=dtype).reshape(dims)
    return arr.copy()


@dataclass(frozen=True)
class SampleFiles:
    """One manifest row: tensor paths relative to the manifest, plus its seed."""

    input: str
    target: str
    sample_seed: int


_MANIFEST_REQUIRED = (
    "format_version",
    "kind",
    "grid",
    "N",
    "lambda",
    "delta",
    "master_seed",
    "count",
    "split",
    "files",
    "source_provenance",
)


def write_manifest(path, manifest: dict) -> None:
    validate_manifest(manifest)
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def read_manifest(path) -> dict:
    try:
        manifest = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    try:
        validate_manifest(manifest)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return manifest


def validate_manifest(manifest: dict) -> None:
    missing = [k for k in _MANIFEST_REQUIRED if k not in manifest]
    if missing:
        raise FormatError(f"manifest is missing keys {missing}")
    if manifest["format_version"] != MANIFEST_FORMAT_VERSION:
        raise FormatError(f"unsupported manifest format_version {manifest['format_version']}")
    if manifest["kind"] not in ("disks", "rasters"):
        raise FormatError(f"unknown dataset kind {manifest['kind']!r}")
    split = manifest["split"]
    if set(split) != {"train", "test"}:
        raise FormatError("manifest split must have exactly the keys 'train' and 'test'")
    if split["train"] + split["test"] != manifest["count"]:
        raise FormatError(
            f"split {split} does not sum to count {manifest['count']}"
        )
    if len(manifest["files"]) != manifest["count"]:
        raise FormatError(
            f"manifest lists {len(manifest['files'])} files but count is {manifest['count']}"
        )
    for row in manifest["files"]:
        if not {"input", "target", "sample_seed"} <= row.keys():
            raise FormatError(f"malformed file entry {row}")


def manifest_sample_paths(manifest: dict, manifest_path, split: str = "all"):
    """Resolve (input, target, seed) tuples for a split ('train'|'test'|'all').

    Samples are ordered by index; the first split['train'] of them are the
    training split.
    """
    base = Path(manifest_path).parent
    n_train = manifest["split"]["train"]
    rows = manifest["files"]
    if split == "train":
        rows = rows[:n_train]
    elif split == "test":
        rows = rows[n_train:]
    elif split != "all":
        raise ValidationError(f"unknown split {split!r}")
    return [(base / r["input"], base / r["target"], r["sample_seed"]) for r in rows]


def export_pgm(values: np.ndarray, path, value_range: tuple[float, float]) -> None:
    """Write a binary PGM (P5, maxval 255) with value_range mapped to [0, 255].

    Values are clamped to the range and rounded half-away-from-zero.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"PGM export needs a 2-D raster, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("PGM export requires finite raster values")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ValidationError(f"degenerate value range ({lo}, {hi})")
    scaled = (np.clip(arr, lo, hi) - lo) / (hi - lo) * 255.0
    # mapped values are >= 0, so half-away-from-zero == floor(x + 0.5)
    bytes_ = np.floor(scaled + 0.5).astype(np.uint8)
    height, width = arr.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + bytes_.tobytes(order="C"))
