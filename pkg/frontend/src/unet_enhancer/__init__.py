"""U-Net enhancer for coarse truncated-Fourier source reconstructions.

Maps band-limited, noise-contaminated reconstructions to high-fidelity
sources (image-to-image regression), with a high-to-low noise transfer
protocol: pre-train at the highest noise level, then fine-tune briefly on
lower-noise data.  Interoperates with the simulation toolkit exclusively
through its TNSR tensor and manifest JSON formats.
"""

__version__ = "0.1.0"

from .infer import infer, write_predictions
from .model import UNet, build_unet
from .tensorio import load_manifest, manifest_rows, read_tensor, write_tensor
from .training import (
    TrainConfig,
    digit_task_config,
    disk_task_config,
    finetune,
    finetune_config,
    load_checkpoint,
    load_split_tensors,
    save_checkpoint,
    scheduled_lr,
    train,
)

__all__ = [
    "TrainConfig",
    "UNet",
    "build_unet",
    "digit_task_config",
    "disk_task_config",
    "finetune",
    "finetune_config",
    "infer",
    "load_checkpoint",
    "load_manifest",
    "load_split_tensors",
    "manifest_rows",
    "read_tensor",
    "save_checkpoint",
    "scheduled_lr",
    "train",
    "write_predictions",
    "write_tensor",
]
