"""unet-enhancer command line: train / finetune / infer.

Datasets and predictions are exchanged with the simulation toolkit purely
through its documented file formats (TNSR tensors + manifest JSON).
"""

from __future__ import annotations

import argparse
import sys

from .infer import infer, write_predictions
from .training import TrainConfig, finetune, load_checkpoint, load_split_tensors, train


def _add_train_flags(sub):
    sub.add_argument("--manifest", required=True)
    sub.add_argument("--epochs", type=int, required=True)
    sub.add_argument("--batch-size", type=int, default=32)
    sub.add_argument("--lr", type=float, default=1e-3)
    sub.add_argument("--decay-factor", type=float, default=0.9)
    sub.add_argument("--decay-every", type=int, default=5)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--levels", type=int, default=4)
    sub.add_argument("--base-channels", type=int, default=64)
    sub.add_argument("--out", required=True)
    sub.add_argument("--loss-log", default=None)


def _config_from(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr_initial=args.lr,
        lr_decay_factor=args.decay_factor,
        lr_decay_every_epochs=args.decay_every,
        seed=args.seed,
        init_checkpoint=getattr(args, "base", None),
        levels=args.levels,
        base_channels=args.base_channels,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="unet-enhancer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a fresh model on a dataset manifest")
    _add_train_flags(p_train)

    p_ft = sub.add_parser("finetune", help="continue training from a checkpoint")
    p_ft.add_argument("--base", required=True)
    _add_train_flags(p_ft)
    p_ft.set_defaults(lr=5e-4, decay_factor=0.5)

    p_inf = sub.add_parser("infer", help="write enhanced rasters for a manifest split")
    p_inf.add_argument("--checkpoint", required=True)
    p_inf.add_argument("--manifest", required=True)
    p_inf.add_argument("--split", default="test", choices=["train", "test", "all"])
    p_inf.add_argument("--out-dir", required=True)
    p_inf.add_argument("--batch-size", type=int, default=32)

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            _, log = train(args.manifest, _config_from(args), args.out, args.loss_log)
            if log:
                print(f"trained {len(log)} epochs, final loss {log[-1][2]:.6g}")
            print(f"wrote checkpoint to {args.out}")
        elif args.command == "finetune":
            _, log = finetune(args.base, args.manifest, _config_from(args),
                              args.out, args.loss_log)
            if log:
                print(f"finetuned {len(log)} epochs, final loss {log[-1][2]:.6g}")
            print(f"wrote checkpoint to {args.out}")
        elif args.command == "infer":
            model, _ = load_checkpoint(args.checkpoint)
            inputs, _targets = load_split_tensors(args.manifest, args.split)
            preds = infer(model, inputs.numpy()[:, 0], batch_size=args.batch_size)
            paths = write_predictions(preds, args.out_dir)
            print(f"wrote {len(paths)} predictions to {args.out_dir}")
    except (ValueError, OSError) as exc:
        print(f"unet-enhancer: error: {exc}", file=sys.stderr)
        return 3
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
