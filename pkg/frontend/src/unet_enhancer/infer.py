"""Deterministic inference: enhanced rasters written as TNSR tensors that the
simulation toolkit's `eval` subcommand can score directly."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .model import UNet
from .tensorio import write_tensor


@torch.no_grad()
def infer(model: UNet, inputs: np.ndarray, batch_size: int = 32) -> np.ndarray:
    """Enhance a stack of rasters; inputs (N, n, n) or (n, n), float32/float64."""
    arr = np.asarray(inputs, dtype=np.float32)
    single = arr.ndim == 2
    if single:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"expected (N, n, n) rasters, got shape {arr.shape}")
    model.eval()
    outputs = []
    for start in range(0, arr.shape[0], batch_size):
        batch = torch.from_numpy(arr[start : start + batch_size, None, :, :])
        outputs.append(model(batch).squeeze(1).numpy())
    result = np.concatenate(outputs, axis=0)
    return result[0] if single else result


def write_predictions(predictions: np.ndarray, out_dir) -> list:
    """One pred_NNNNNN.tnsr per raster, named to pair with sorted targets."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, raster in enumerate(predictions):
        path = out_dir / f"pred_{idx:06d}.tnsr"
        write_tensor(path, raster.astype(np.float32))
        paths.append(path)
    return paths
