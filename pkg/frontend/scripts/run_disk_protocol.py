#!/usr/bin/env python3
"""Run the disk-source protocol end to end: dataset generation (via the
simulation toolkit's CLI), from-scratch training at the target noise level,
high-noise pre-training, direct application of the high-noise model to the
target noise level, and the high-to-low fine-tuning comparison.

At reference scale (--scale full: base 64 U-Net, 200/30 epochs) this
reproduces the published protocol and needs a GPU-class budget; --scale
medium (default) shrinks the network and epoch counts so the whole run fits
in about an hour of CPU time, for smoke-level validation of the protocol.

Results (NMSE per arm) are printed and written as JSON next to --work-dir.
"""

import argparse
import json
import subprocess
import sys
import time
from pathlib import Path

from unet_enhancer import (
    finetune,
    finetune_config,
    disk_task_config,
    infer,
    load_checkpoint,
    load_split_tensors,
    train,
    write_predictions,
)

SCALES = {
    # (base_channels, scratch_epochs, pretrain_epochs, dataset_count)
    "full": (64, 200, 200, 2000),
    "medium": (16, 60, 40, 2000),
    "smoke": (8, 4, 4, 120),
}


def toolkit(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "ispkit", *map(str, argv)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"ispkit {argv[0]} failed: {proc.stderr.strip()}")
    return proc.stdout


def eval_nmse(manifest, out_csv, pred_dir=None):
    argv = ["eval", "--manifest", manifest, "--split", "test", "--out-csv", out_csv]
    if pred_dir is not None:
        argv += ["--pred-dir", pred_dir]
    summary = toolkit(*argv).strip().splitlines()[-1]
    return float(summary.split("nmse_mean=")[1].split()[0])


def predict(ckpt_path, manifest, pred_dir):
    model, _ = load_checkpoint(ckpt_path)
    inputs, _ = load_split_tensors(manifest, "test")
    write_predictions(infer(model, inputs.numpy()[:, 0]), pred_dir)
    return pred_dir


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--work-dir", required=True)
    parser.add_argument("--scale", choices=SCALES, default="medium")
    parser.add_argument("--delta", type=float, default=0.05,
                        help="target noise level (pre-training always uses 1.0)")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    base_ch, scratch_epochs, pretrain_epochs, count = SCALES[args.scale]
    work = Path(args.work_dir)
    work.mkdir(parents=True, exist_ok=True)
    results = {"scale": args.scale, "delta": args.delta, "base_channels": base_ch,
               "count": count, "epochs": {"scratch": scratch_epochs,
                                          "pretrain": pretrain_epochs, "finetune": 30}}
    t0 = time.time()

    manifests = {}
    for delta in sorted({args.delta, 1.0}):
        ds_dir = work / f"disks_{int(delta * 100):03d}"
        if not (ds_dir / "manifest.json").exists():
            toolkit("gen-disks", "--count", count, "--N", 3, "--delta", delta,
                    "--seed", args.seed, "--split", 0.8, "--out-dir", ds_dir)
        manifests[delta] = ds_dir / "manifest.json"
    results["fourier_baseline"] = eval_nmse(manifests[args.delta], work / "baseline.csv")
    print(f"[{time.time()-t0:7.0f}s] Fourier N=3 baseline NMSE: "
          f"{results['fourier_baseline']:.4f}", flush=True)

    scratch_cfg = disk_task_config(epochs=scratch_epochs, base_channels=base_ch, seed=0)
    scratch_ckpt = work / "scratch.pt"
    train(manifests[args.delta], scratch_cfg, scratch_ckpt, work / "scratch_loss.csv")
    results["scratch"] = eval_nmse(
        manifests[args.delta], work / "scratch.csv",
        predict(scratch_ckpt, manifests[args.delta], work / "preds_scratch"),
    )
    print(f"[{time.time()-t0:7.0f}s] from-scratch ({scratch_epochs} epochs) NMSE: "
          f"{results['scratch']:.4f}", flush=True)

    pretrain_cfg = disk_task_config(epochs=pretrain_epochs, base_channels=base_ch, seed=0)
    base_ckpt = work / "noise100.pt"
    train(manifests[1.0], pretrain_cfg, base_ckpt, work / "pretrain_loss.csv")
    results["pretrain_on_own_task"] = eval_nmse(
        manifests[1.0], work / "pretrain.csv",
        predict(base_ckpt, manifests[1.0], work / "preds_pretrain"),
    )
    results["direct_transfer"] = eval_nmse(
        manifests[args.delta], work / "direct.csv",
        predict(base_ckpt, manifests[args.delta], work / "preds_direct"),
    )
    print(f"[{time.time()-t0:7.0f}s] 100%-noise model: own-task NMSE "
          f"{results['pretrain_on_own_task']:.4f}, applied directly to "
          f"delta={args.delta}: {results['direct_transfer']:.4f}", flush=True)

    ft_cfg = finetune_config(base_channels=base_ch, seed=0)
    ft_ckpt = work / "finetuned.pt"
    finetune(base_ckpt, manifests[args.delta], ft_cfg, ft_ckpt, work / "ft_loss.csv")
    results["transfer_30_epochs"] = eval_nmse(
        manifests[args.delta], work / "transfer.csv",
        predict(ft_ckpt, manifests[args.delta], work / "preds_transfer"),
    )
    print(f"[{time.time()-t0:7.0f}s] high-to-low transfer (30 epochs) NMSE: "
          f"{results['transfer_30_epochs']:.4f}", flush=True)

    results["elapsed_seconds"] = round(time.time() - t0, 1)
    (work / "results.json").write_text(json.dumps(results, indent=2) + "\n")
    print(json.dumps(results, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
