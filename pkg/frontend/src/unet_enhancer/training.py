"""Training, fine-tuning, and checkpointing for the enhancer.

The optimizer is Adam minimizing the MSE between enhanced reconstructions
and ground truth, with a step-decay schedule: the learning rate at epoch e
is exactly lr_initial * lr_decay_factor ** floor(e / lr_decay_every_epochs).
A fixed seed makes weight initialization and the per-epoch shuffle order
reproducible.  Checkpoints embed the architecture descriptor and training
provenance (manifest SHA-256 + config) so a network can always be rebuilt
exactly before loading its parameters.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from .model import UNet, build_unet
from .tensorio import load_manifest, manifest_rows, read_tensor

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 32
    lr_initial: float = 1e-3
    lr_decay_factor: float = 0.9
    lr_decay_every_epochs: int = 5
    seed: int = 0
    init_checkpoint: str | None = None
    levels: int = 4
    base_channels: int = 64

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1 or self.lr_initial <= 0 or self.lr_decay_every_epochs < 1:
            raise ValueError("batch_size, lr_initial, lr_decay_every_epochs must be positive")
        if not (0 < self.lr_decay_factor <= 1):
            raise ValueError(f"decay factor must be in (0, 1], got {self.lr_decay_factor}")


def disk_task_config(**overrides) -> TrainConfig:
    """Reference schedule for the disk task: 200 epochs, lr 1e-3, x0.9 / 5."""
    defaults = dict(epochs=200, lr_initial=1e-3, lr_decay_factor=0.9,
                    lr_decay_every_epochs=5)
    defaults.update(overrides)
    return TrainConfig(**defaults)


def digit_task_config(**overrides) -> TrainConfig:
    """Reference schedule for the digit task: 50 epochs, lr 1e-3, x0.5 / 5."""
    defaults = dict(epochs=50, lr_initial=1e-3, lr_decay_factor=0.5,
                    lr_decay_every_epochs=5)
    defaults.update(overrides)
    return TrainConfig(**defaults)


def finetune_config(**overrides) -> TrainConfig:
    """Reference fine-tuning schedule: 30 epochs, lr 5e-4, x0.5 / 5."""
    defaults = dict(epochs=30, lr_initial=5e-4, lr_decay_factor=0.5,
                    lr_decay_every_epochs=5)
    defaults.update(overrides)
    return TrainConfig(**defaults)


def scheduled_lr(config: TrainConfig, epoch: int) -> float:
    return config.lr_initial * config.lr_decay_factor ** (epoch // config.lr_decay_every_epochs)


def load_split_tensors(manifest_path, split: str) -> tuple[torch.Tensor, torch.Tensor]:
    """(inputs, targets) as (N, 1, n, n) float32 tensors for one split."""
    manifest = load_manifest(manifest_path)
    rows = manifest_rows(manifest, manifest_path, split)
    if not rows:
        raise ValueError(f"manifest split {split!r} is empty")
    inputs = np.stack([read_tensor(i) for i, _ in rows])[:, None, :, :]
    targets = np.stack([read_tensor(t) for _, t in rows])[:, None, :, :]
    return torch.from_numpy(inputs), torch.from_numpy(targets)


def save_checkpoint(path, model: UNet, provenance: dict) -> None:
    torch.save(
        {
            "format_version": CHECKPOINT_VERSION,
            "architecture": {"levels": model.levels, "base_channels": model.base_channels},
            "state_dict": model.state_dict(),
            "provenance": provenance,
        },
        path,
    )


def load_checkpoint(path) -> tuple[UNet, dict]:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    if blob.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version")
    arch = blob["architecture"]
    model = build_unet(levels=arch["levels"], base_channels=arch["base_channels"])
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, blob


def _train_model(
    model: UNet, manifest_path, config: TrainConfig, out_path, loss_log_path=None
):
    inputs, targets = load_split_tensors(manifest_path, "train")
    dataset = TensorDataset(inputs, targets)
    shuffle_gen = torch.Generator().manual_seed(config.seed)
    loader = DataLoader(
        dataset, batch_size=config.batch_size, shuffle=True, generator=shuffle_gen
    )
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr_initial)
    scheduler = torch.optim.lr_scheduler.StepLR(
        optimizer, step_size=config.lr_decay_every_epochs, gamma=config.lr_decay_factor
    )
    loss_fn = nn.MSELoss()
    log_rows = []
    model.train()
    for epoch in range(config.epochs):
        lr_now = optimizer.param_groups[0]["lr"]
        assert abs(lr_now - scheduled_lr(config, epoch)) <= 1e-12 * config.lr_initial
        total = 0.0
        seen = 0
        for xb, yb in loader:
            optimizer.zero_grad()
            loss = loss_fn(model(xb), yb)
            loss.backward()
            optimizer.step()
            total += loss.item() * xb.shape[0]
            seen += xb.shape[0]
        scheduler.step()
        log_rows.append((epoch, lr_now, total / seen))
    model.eval()

    if loss_log_path is not None:
        with Path(loss_log_path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "lr", "train_loss"])
            writer.writerows(log_rows)

    provenance = {
        "manifest_sha256": hashlib.sha256(Path(manifest_path).read_bytes()).hexdigest(),
        "config": asdict(config),
    }
    if out_path is not None:
        save_checkpoint(out_path, model, provenance)
    return model, log_rows


def train(manifest_path, config: TrainConfig, out_path=None, loss_log_path=None):
    """Train a fresh U-Net on the manifest's train split."""
    torch.manual_seed(config.seed)
    model = build_unet(levels=config.levels, base_channels=config.base_channels)
    return _train_model(model, manifest_path, config, out_path, loss_log_path)


def finetune(base_checkpoint, manifest_path, config: TrainConfig,
             out_path=None, loss_log_path=None):
    """Continue training from a checkpoint (all parameters initialized from it)."""
    model, blob = load_checkpoint(base_checkpoint)
    arch = blob["architecture"]
    if (arch["levels"], arch["base_channels"]) != (config.levels, config.base_channels):
        raise ValueError(
            f"architecture mismatch: checkpoint has levels={arch['levels']}, "
            f"base_channels={arch['base_channels']}, config asks for "
            f"levels={config.levels}, base_channels={config.base_channels}"
        )
    torch.manual_seed(config.seed)
    return _train_model(model, manifest_path, config, out_path, loss_log_path)
