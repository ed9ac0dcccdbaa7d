"""Ground-truth source generation (random disk scenes, ingested digit/letter
rasters) and paired-dataset construction.

A training pair is (coarse reconstruction, ground truth): the ground truth is
pushed through plan -> synthesize -> add_noise -> recover -> evaluate, and the
resulting band-limited raster becomes the pair's input.

Every random draw is tied to an explicit seed.  Dataset samples use
per-sample seeds derived from (master_seed, index), so the dataset content is
a pure function of its parameters no matter how many workers generate it.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import (
    DEFAULT_LAMBDA,
    GridSpec,
    ReconstructionRaster,
    SourceRaster,
    build_measurement_plan,
)
from .errors import FormatError, ValidationError
from .forward import DiskSpec, add_noise, synthesize
from .inversion import evaluate_series, recover_coefficients
from .storage import MANIFEST_FORMAT_VERSION, write_manifest, write_tensor

_MAX_REJECTION_DRAWS = 10_000
IDX_IMAGE_MAGIC = 0x00000803


@dataclass(frozen=True)
class DiskSceneConfig:
    """Sampling ranges for random disk scenes (count range is inclusive)."""

    count_range: tuple[int, int] = (1, 3)
    radius_range: tuple[float, float] = (0.1, 0.2)
    amplitude_range: tuple[float, float] = (-1.0, 1.0)
    a: float = 1.0
    n: int = 64

    def __post_init__(self):
        if self.count_range[0] > self.count_range[1] or self.count_range[0] < 1:
            raise ValidationError(f"bad disk count range {self.count_range}")
        if not (0 < self.radius_range[0] <= self.radius_range[1]):
            raise ValidationError(f"bad radius range {self.radius_range}")
        if self.radius_range[1] >= self.a / 2:
            raise ValidationError(
                f"max radius {self.radius_range[1]} cannot fit inside V0 with a={self.a}"
            )
        if self.amplitude_range[0] > self.amplitude_range[1]:
            raise ValidationError(f"bad amplitude range {self.amplitude_range}")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(a=self.a, n=self.n)


@dataclass(frozen=True)
class PairMeta:
    N: int
    delta: float
    kind: str


@dataclass(frozen=True)
class PairSample:
    """One (coarse reconstruction, ground truth) training pair."""

    input: ReconstructionRaster
    target: SourceRaster
    sample_seed: int
    metadata: PairMeta

    def __post_init__(self):
        if self.input.grid != self.target.grid:
            raise ValidationError("pair input and target must share the same grid")


def rasterize_disks(disks, grid: GridSpec) -> SourceRaster:
    """Pixel-center membership rasterization; later disks overwrite earlier ones."""
    X1, X2 = grid.pixel_centers()
    values = np.zeros((grid.n, grid.n))
    for d in disks:
        inside = (X1 - d.center[0]) ** 2 + (X2 - d.center[1]) ** 2 <= d.radius**2
        values[inside] = d.amplitude
    return SourceRaster(grid=grid, values=values)


def sample_disk_scene(config: DiskSceneConfig, seed: int):
    """Draw one random disk scene; returns (raster, disk list).

    Draw order per disk attempt: center (x1, x2), radius, amplitude; the
    attempt is rejected until |c_i| + r <= a/2 holds in both coordinates.
    """
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    lo, hi = config.count_range
    count = int(rng.integers(lo, hi + 1))
    half = config.a / 2
    disks = []
    for _ in range(count):
        for attempt in range(_MAX_REJECTION_DRAWS):
            c1, c2 = rng.uniform(-half, half, size=2)
            radius = rng.uniform(*config.radius_range)
            amplitude = rng.uniform(*config.amplitude_range)
            if abs(c1) + radius <= half and abs(c2) + radius <= half:
                disks.append(DiskSpec(center=(c1, c2), radius=radius, amplitude=amplitude))
                break
        else:
            raise ValidationError(
                f"disk rejection sampling exceeded {_MAX_REJECTION_DRAWS} draws; "
                "the configured ranges leave no room inside V0"
            )
    return rasterize_disks(disks, config.grid), disks


def ingest_idx_images(path, limit: int | None = None):
    """Read an IDX image file (big-endian, magic 0x00000803) into [0, 1] rasters."""
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise FormatError(f"{path}: truncated IDX header ({len(raw)} bytes) at offset 0")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(
            f"{path}: bad IDX magic 0x{magic:08x} at offset 0 "
            f"(expected 0x{IDX_IMAGE_MAGIC:08x})"
        )
    if limit is not None:
        count = min(count, int(limit))
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise FormatError(
            f"{path}: truncated IDX payload at offset {len(raw)} (need {expected} bytes)"
        )
    images = []
    for idx in range(count):
        start = 16 + idx * rows * cols
        block = np.frombuffer(raw[start : start + rows * cols], dtype=np.uint8)
        images.append(block.reshape(rows, cols).astype(float) / 255.0)
    return images


def _bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Pixel-center-aligned bilinear resampling (edge-clamped)."""
    in_h, in_w = img.shape
    ry = np.clip((np.arange(out_h) + 0.5) * in_h / out_h - 0.5, 0, in_h - 1)
    rx = np.clip((np.arange(out_w) + 0.5) * in_w / out_w - 0.5, 0, in_w - 1)
    y0 = np.floor(ry).astype(int)
    x0 = np.floor(rx).astype(int)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ry - y0)[:, None]
    wx = (rx - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - wx) + img[np.ix_(y0, x1)] * wx
    bot = img[np.ix_(y1, x0)] * (1 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def prepare_raster(img: np.ndarray, grid: GridSpec = GridSpec()) -> SourceRaster:
    """Resize a [0, 1] grayscale image to the grid, clamp, and threshold.

    Bilinear resize to n x n, clamp to [0, 1], then set values below 0.1 to
    exactly zero (background suppression).
    """
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1:
        raise ValidationError("input image values must be finite and within [0, 1]")
    resized = np.clip(_bilinear_resize(arr, grid.n, grid.n), 0.0, 1.0)
    resized[resized < 0.1] = 0.0
    return SourceRaster(grid=grid, values=resized)


def build_pair(
    source: SourceRaster, N: int, delta: float, seed: int,
    lam: float = DEFAULT_LAMBDA, kind: str = "unspecified",
) -> PairSample:
    """Run the forward + inversion pipeline on one ground-truth raster."""
    plan = build_measurement_plan(N, source.grid.a, lam)
    data = synthesize(source, plan)
    noisy = add_noise(data, delta, seed)
    recon = evaluate_series(recover_coefficients(noisy, plan), source.grid)
    return PairSample(
        input=recon,
        target=source,
        sample_seed=int(seed),
        metadata=PairMeta(N=int(N), delta=float(delta), kind=kind),
    )


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-sample seed mixed from (master_seed, index)."""
    mask = 0xFFFFFFFFFFFFFFFF
    ss = np.random.SeedSequence(entropy=[int(master_seed) & mask, int(index) & mask])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def split_counts(count: int, train_fraction: float) -> tuple[int, int]:
    """Deterministic train/test sizes; the first n_train indices are training."""
    if count < 1:
        raise ValidationError(f"dataset count must be >= 1, got {count}")
    if not (0.0 <= train_fraction <= 1.0):
        raise ValidationError(f"train fraction must be in [0, 1], got {train_fraction}")
    n_train = int(round(count * train_fraction))
    return n_train, count - n_train


def dataset_workers() -> int:
    """Worker count for dataset generation (ISP_THREADS, default = cores)."""
    env = os.environ.get("ISP_THREADS", "").strip()
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ValidationError(f"ISP_THREADS must be an integer, got {env!r}") from None
        if workers < 1:
            raise ValidationError(f"ISP_THREADS must be >= 1, got {workers}")
        return workers
    return os.cpu_count() or 1


def build_dataset(
    out_dir,
    kind: str,
    count: int,
    N: int,
    delta: float,
    master_seed: int,
    train_fraction: float,
    *,
    scene_config: DiskSceneConfig | None = None,
    images=None,
    lam: float = DEFAULT_LAMBDA,
    source_provenance: str | None = None,
    workers: int | None = None,
) -> Path:
    """Generate a paired dataset on disk and return the manifest path.

    kind 'disks' samples random disk scenes (scene_config, default ranges as
    configured); kind 'rasters' consumes pre-loaded [0, 1] images (e.g. from
    ingest_idx_images), preparing each to the grid.  Sample i uses the seed
    derive_seed(master_seed, i) for both its scene and its noise draws, so the
    dataset is reproducible regardless of worker count.
    """
    if kind == "disks":
        scene_config = scene_config or DiskSceneConfig()
        grid = scene_config.grid
        provenance = source_provenance or (
            f"random disk scenes: count{scene_config.count_range}, "
            f"radius{scene_config.radius_range}, amplitude{scene_config.amplitude_range}"
        )
    elif kind == "rasters":
        if images is None:
            raise ValidationError("kind 'rasters' requires source images")
        if len(images) < count:
            raise ValidationError(
                f"need {count} source images but only {len(images)} were provided"
            )
        grid = GridSpec()
        provenance = source_provenance or "user-supplied raster images"
    else:
        raise ValidationError(f"unknown dataset kind {kind!r}")

    n_train, n_test = split_counts(count, train_fraction)
    out_dir = Path(out_dir)
    (out_dir / "train").mkdir(parents=True, exist_ok=True)
    (out_dir / "test").mkdir(parents=True, exist_ok=True)

    def make_sample(index: int) -> dict:
        seed = derive_seed(master_seed, index)
        if kind == "disks":
            source, _ = sample_disk_scene(scene_config, seed)
        else:
            source = prepare_raster(images[index], grid)
        pair = build_pair(source, N, delta, seed, lam=lam, kind=kind)
        part = "train" if index < n_train else "test"
        input_rel = f"{part}/input_{index:06d}.tnsr"
        target_rel = f"{part}/target_{index:06d}.tnsr"
        write_tensor(out_dir / input_rel, pair.input.values.astype(np.float32))
        write_tensor(out_dir / target_rel, pair.target.values.astype(np.float32))
        return {"input": input_rel, "target": target_rel, "sample_seed": seed}

    n_workers = workers if workers is not None else dataset_workers()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            files = list(pool.map(make_sample, range(count)))
    else:
        files = [make_sample(i) for i in range(count)]

    manifest = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "kind": kind,
        "grid": {"a": grid.a, "n": grid.n},
        "N": int(N),
        "lambda": float(lam),
        "delta": float(delta),
        "master_seed": int(master_seed),
        "count": int(count),
        "split": {"train": n_train, "test": n_test},
        "files": files,
        "source_provenance": provenance,
    }
    manifest_path = out_dir / "manifest.json"
    write_manifest(manifest_path, manifest)
    return manifest_path
