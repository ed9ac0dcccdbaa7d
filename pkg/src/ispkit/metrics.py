"""Reconstruction quality metrics: NMSE, global SSIM, and batch aggregation.

NMSE(pred, truth) = ||pred - truth||_2^2 / ||truth||_2^2.

SSIM is computed with a single global window (means, population variances,
and covariance taken over the whole image):

    SSIM = (2 mu_x mu_y + C1)(2 sigma_xy + C2)
           / ((mu_x^2 + mu_y^2 + C1)(sigma_x^2 + sigma_y^2 + C2)),

with C1 = (0.01 * L)^2, C2 = (0.03 * L)^2 and dynamic range L = 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

SSIM_C1 = (0.01 * 1.0) ** 2
SSIM_C2 = (0.03 * 1.0) ** 2


def nmse(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValidationError(f"shape mismatch {pred.shape} vs {truth.shape}")
    denom = float(np.sum(truth * truth))
    if denom == 0.0:
        raise ValidationError("undefined NMSE: the ground truth is identically zero")
    return float(np.sum((pred - truth) ** 2) / denom)


def ssim_global(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValidationError(f"shape mismatch {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValidationError("SSIM needs at least 2 pixels")
    mx, my = x.mean(), y.mean()
    vx = np.mean((x - mx) ** 2)  # population variance
    vy = np.mean((y - my) ** 2)
    cov = np.mean((x - mx) * (y - my))
    return float(
        (2 * mx * my + SSIM_C1)
        * (2 * cov + SSIM_C2)
        / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2))
    )


@dataclass(frozen=True)
class Histogram:
    bin_left: np.ndarray
    bin_right: np.ndarray
    count: np.ndarray


@dataclass(frozen=True)
class BatchStats:
    """Aggregate metrics over a batch; the normal-fit parameters are the
    sample mean and population standard deviation of each metric."""

    nmse_mean: float
    nmse_std: float
    ssim_mean: float
    ssim_std: float
    per_sample: tuple[tuple[float, float], ...]  # (nmse, ssim) per pair
    nmse_hist: Histogram
    ssim_hist: Histogram


def _histogram(values: np.ndarray, bin_count: int) -> Histogram:
    counts, edges = np.histogram(values, bins=bin_count)
    return Histogram(bin_left=edges[:-1], bin_right=edges[1:], count=counts)


def evaluate_batch(pairs, bin_count: int = 30) -> BatchStats:
    """Per-sample NMSE/SSIM plus their means, stds, and histograms.

    pairs is a sequence of (pred, truth) rasters; the moment-matched normal
    fit for each metric is (mean, population std).
    """
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("evaluate_batch needs a non-empty list of pairs")
    if bin_count < 1:
        raise ValidationError(f"bin count must be >= 1, got {bin_count}")
    per_sample = tuple((nmse(p, t), ssim_global(p, t)) for p, t in pairs)
    nm = np.array([s[0] for s in per_sample])
    ss = np.array([s[1] for s in per_sample])
    return BatchStats(
        nmse_mean=float(nm.mean()),
        nmse_std=float(nm.std()),  # population
        ssim_mean=float(ss.mean()),
        ssim_std=float(ss.std()),
        per_sample=per_sample,
        nmse_hist=_histogram(nm, bin_count),
        ssim_hist=_histogram(ss, bin_count),
    )


def write_metrics_csv(path, per_sample) -> None:
    """Per-sample metric table with header index,nmse,ssim."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "nmse", "ssim"])
        for idx, (nm, ss) in enumerate(per_sample):
            writer.writerow([idx, repr(float(nm)), repr(float(ss))])


def write_histogram_csv(path, hist: Histogram) -> None:
    """Histogram table with header bin_left,bin_right,count."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, cnt in zip(hist.bin_left, hist.bin_right, hist.count):
            writer.writerow([repr(float(left)), repr(float(right)), int(cnt)])
