import json

import numpy as np
import pytest

from unet_enhancer.tensorio import write_tensor


@pytest.fixture
def tiny_dataset(tmp_path):
    """A 6-sample synthetic dataset (4 train / 2 test) of 16x16 rasters,
    written directly in the toolkit's file formats."""
    rng = np.random.default_rng(7)
    (tmp_path / "s").mkdir()
    files = []
    for i in range(6):
        target = (rng.uniform(0, 1, (16, 16)) > 0.7).astype(np.float32)
        blur = target + rng.normal(0, 0.2, (16, 16)).astype(np.float32)
        write_tensor(tmp_path / "s" / f"input_{i}.tnsr", blur.astype(np.float32))
        write_tensor(tmp_path / "s" / f"target_{i}.tnsr", target)
        files.append(
            {"input": f"s/input_{i}.tnsr", "target": f"s/target_{i}.tnsr", "sample_seed": i}
        )
    manifest = {
        "format_version": 1,
        "kind": "disks",
        "grid": {"a": 1.0, "n": 16},
        "N": 2,
        "lambda": 1e-3,
        "delta": 0.5,
        "master_seed": 0,
        "count": 6,
        "split": {"train": 4, "test": 2},
        "files": files,
        "source_provenance": "synthetic fixture",
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path
