"""Command-line interface for the simulation / inversion / dataset pipeline.

Every subcommand can read defaults from a JSON config file (--config);
explicit flags override config values, which override built-in defaults.
Exit codes: 0 success, 2 usage error, 3 data/format error.  All failures
print a single machine-parsable line to stderr:

    ispkit: error: <kind>: <message>
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import figures
from .datagen import (
    DiskSceneConfig,
    build_dataset,
    ingest_idx_images,
)
from .domain import (
    DEFAULT_A,
    DEFAULT_LAMBDA,
    DEFAULT_N_PIXELS,
    GridSpec,
    FarFieldSet,
    MeasurementPlan,
    SourceRaster,
    build_measurement_plan,
)
from .errors import FormatError, ISPKitError, ValidationError
from .forward import add_noise, synthesize
from .inversion import evaluate_series, recover_coefficients
from .metrics import evaluate_batch, write_histogram_csv, write_metrics_csv
from .storage import (
    export_pgm,
    manifest_sample_paths,
    read_manifest,
    read_tensor,
    write_tensor,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems on a single stderr line."""

    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# plan serialization (JSON external interface)
# ---------------------------------------------------------------------------


def write_plan(path, plan: MeasurementPlan) -> None:
    doc = {
        "N": plan.N,
        "a": plan.a,
        "lambda": plan.lam,
        "entries": [
            {"l": list(e.l), "k": e.k, "direction": list(e.direction)}
            for e in plan.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_plan(path) -> MeasurementPlan:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    for key in ("N", "a", "lambda", "entries"):
        if key not in doc:
            raise FormatError(f"{path}: plan file is missing key {key!r}")
    plan = build_measurement_plan(doc["N"], doc["a"], doc["lambda"])
    listed = [tuple(e["l"]) for e in doc["entries"]]
    if listed != [e.l for e in plan.entries]:
        raise FormatError(
            f"{path}: entry list does not match the canonical lexicographic plan "
            f"for N={doc['N']}"
        )
    return plan


# ---------------------------------------------------------------------------
# config merging
# ---------------------------------------------------------------------------


def _load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise FormatError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise FormatError(f"{path}: config must be a JSON object")
    return cfg


def _merge(args: argparse.Namespace, spec: dict) -> dict:
    """Resolve each option as flag > config > default; enforce required ones."""
    cfg = _load_config(args.config) if args.config else {}
    unknown = set(cfg) - set(spec)
    if unknown:
        raise FormatError(f"unknown config keys {sorted(unknown)}")
    merged = {}
    for key, (required, default, cast) in spec.items():
        value = getattr(args, key.replace("-", "_"), None)
        if value is None and key in cfg:
            value = cfg[key]
        if value is None:
            value = default
        if value is None and required:
            raise _UsageError(f"missing required option --{key}")
        if value is not None and cast is not None:
            try:
                value = cast(value)
            except (TypeError, ValueError):
                raise _UsageError(f"option --{key} has invalid value {value!r}")
        merged[key] = value
    return merged


def _read_raster(path) -> np.ndarray:
    arr = read_tensor(path)
    if arr.ndim != 2 or np.iscomplexobj(arr):
        raise FormatError(
            f"{path}: expected a rank-2 real tensor, got rank {arr.ndim} {arr.dtype}"
        )
    return arr.astype(float)


def _parse_range(text: str) -> tuple[float, float]:
    sep = ":" if ":" in text else ","
    parts = text.split(sep)
    if len(parts) != 2:
        raise _UsageError(f"--range must be 'lo:hi', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise _UsageError(f"--range must be 'lo:hi' with numeric bounds, got {text!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_plan(args) -> int:
    opt = _merge(args, {
        "N": (True, None, int),
        "a": (False, DEFAULT_A, float),
        "lambda": (False, DEFAULT_LAMBDA, float),
        "out": (True, None, str),
    })
    plan = build_measurement_plan(opt["N"], opt["a"], opt["lambda"])
    write_plan(opt["out"], plan)
    print(f"wrote plan with {len(plan.entries)} entries to {opt['out']}")
    return 0


def _cmd_simulate(args) -> int:
    opt = _merge(args, {
        "source": (True, None, str),
        "N": (True, None, int),
        "a": (False, DEFAULT_A, float),
        "lambda": (False, DEFAULT_LAMBDA, float),
        "delta": (False, 0.0, float),
        "seed": (False, None, int),
        "out": (True, None, str),
    })
    if opt["delta"] > 0 and opt["seed"] is None:
        raise _UsageError("--seed is required when --delta > 0")
    values = _read_raster(opt["source"])
    if values.shape[0] != values.shape[1]:
        raise FormatError(f"{opt['source']}: source raster must be square, got {values.shape}")
    grid = GridSpec(a=opt["a"], n=values.shape[0])
    plan = build_measurement_plan(opt["N"], opt["a"], opt["lambda"])
    data = synthesize(SourceRaster(grid=grid, values=values), plan)
    if opt["delta"] > 0:
        data = add_noise(data, opt["delta"], opt["seed"])
    write_tensor(opt["out"], data.as_array().astype(np.complex64))
    sidecar = {
        "N": plan.N,
        "a": plan.a,
        "lambda": plan.lam,
        "delta": data.noise_delta,
        "seed": data.seed,
        "count": len(plan.entries),
        "order": "lexicographic in (l1, l2)",
    }
    Path(str(opt["out"]) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {len(plan.entries)} far-field values to {opt['out']}")
    return 0


def _cmd_invert(args) -> int:
    opt = _merge(args, {
        "farfield": (True, None, str),
        "plan": (True, None, str),
        "n": (False, DEFAULT_N_PIXELS, int),
        "out": (True, None, str),
    })
    plan = read_plan(opt["plan"])
    arr = read_tensor(opt["farfield"])
    if arr.ndim != 1 or not np.iscomplexobj(arr):
        raise FormatError(
            f"{opt['farfield']}: expected a rank-1 complex tensor, got rank {arr.ndim} {arr.dtype}"
        )
    if arr.shape[0] != len(plan.entries):
        raise FormatError(
            f"{opt['farfield']}: {arr.shape[0]} values do not match the plan's "
            f"{len(plan.entries)} entries"
        )
    data = FarFieldSet(
        plan=plan,
        values={e.l: complex(arr[p]) for p, e in enumerate(plan.entries)},
    )
    recon = evaluate_series(
        recover_coefficients(data, plan), GridSpec(a=plan.a, n=opt["n"])
    )
    write_tensor(opt["out"], recon.values.astype(np.float32))
    sidecar = {"max_imag_residual": recon.max_imag_residual}
    Path(str(opt["out"]) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {opt['n']}x{opt['n']} reconstruction to {opt['out']}")
    return 0


def _cmd_gen_disks(args) -> int:
    opt = _merge(args, {
        "count": (True, None, int),
        "N": (True, None, int),
        "delta": (False, 0.0, float),
        "seed": (True, None, int),
        "split": (False, 0.8, float),
        "out-dir": (True, None, str),
        "a": (False, 1.0, float),
        "n": (False, 64, int),
        "lambda": (False, DEFAULT_LAMBDA, float),
        "count-min": (False, 1, int),
        "count-max": (False, 3, int),
        "radius-min": (False, 0.1, float),
        "radius-max": (False, 0.2, float),
        "amplitude-min": (False, -1.0, float),
        "amplitude-max": (False, 1.0, float),
        "workers": (False, None, int),
    })
    config = DiskSceneConfig(
        count_range=(opt["count-min"], opt["count-max"]),
        radius_range=(opt["radius-min"], opt["radius-max"]),
        amplitude_range=(opt["amplitude-min"], opt["amplitude-max"]),
        a=opt["a"],
        n=opt["n"],
    )
    manifest_path = build_dataset(
        opt["out-dir"], "disks", opt["count"], opt["N"], opt["delta"], opt["seed"],
        opt["split"], scene_config=config, lam=opt["lambda"], workers=opt["workers"],
    )
    print(f"wrote dataset manifest to {manifest_path}")
    return 0


def _cmd_gen_rasters(args) -> int:
    opt = _merge(args, {
        "idx-path": (True, None, str),
        "count": (True, None, int),
        "N": (True, None, int),
        "delta": (False, 0.0, float),
        "seed": (True, None, int),
        "split": (False, 0.9, float),
        "out-dir": (True, None, str),
        "lambda": (False, DEFAULT_LAMBDA, float),
        "workers": (False, None, int),
    })
    images = ingest_idx_images(opt["idx-path"], limit=opt["count"])
    manifest_path = build_dataset(
        opt["out-dir"], "rasters", opt["count"], opt["N"], opt["delta"], opt["seed"],
        opt["split"], images=images, lam=opt["lambda"],
        source_provenance=f"IDX file {opt['idx-path']}", workers=opt["workers"],
    )
    print(f"wrote dataset manifest to {manifest_path}")
    return 0


def _collect_pairs(opt):
    """Yield (pred, truth) arrays for the eval subcommand's input modes."""
    if opt["manifest"]:
        manifest = read_manifest(opt["manifest"])
        rows = manifest_sample_paths(manifest, opt["manifest"], split=opt["split"])
        truth_paths = [t for (_i, t, _s) in rows]
        if opt["pred-dir"]:
            pred_paths = sorted(Path(opt["pred-dir"]).glob("*.tnsr"))
            if len(pred_paths) != len(truth_paths):
                raise ValidationError(
                    f"{len(pred_paths)} prediction tensors vs {len(truth_paths)} "
                    f"manifest samples in split {opt['split']!r}"
                )
        else:
            pred_paths = [i for (i, _t, _s) in rows]
    elif opt["pred-dir"] and opt["truth-dir"]:
        pred_paths = sorted(Path(opt["pred-dir"]).glob("*.tnsr"))
        truth_paths = sorted(Path(opt["truth-dir"]).glob("*.tnsr"))
        if len(pred_paths) != len(truth_paths):
            raise ValidationError(
                f"{len(pred_paths)} prediction tensors vs {len(truth_paths)} truth tensors"
            )
        if not pred_paths:
            raise ValidationError("no .tnsr files found to evaluate")
    else:
        raise _UsageError("eval needs either --manifest or both --pred-dir and --truth-dir")
    return [( _read_raster(p), _read_raster(t)) for p, t in zip(pred_paths, truth_paths)]


def _cmd_eval(args) -> int:
    opt = _merge(args, {
        "manifest": (False, None, str),
        "pred-dir": (False, None, str),
        "truth-dir": (False, None, str),
        "split": (False, "all", str),
        "out-csv": (True, None, str),
        "bins": (False, 30, int),
        "no-figures": (False, False, bool),
    })
    pairs = _collect_pairs(opt)
    stats = evaluate_batch(pairs, bin_count=opt["bins"])
    out_csv = Path(opt["out-csv"])
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(out_csv, stats.per_sample)
    stem = out_csv.with_suffix("")
    write_histogram_csv(f"{stem}_nmse_hist.csv", stats.nmse_hist)
    write_histogram_csv(f"{stem}_ssim_hist.csv", stats.ssim_hist)
    if not opt["no-figures"]:
        figures.save_metric_histogram(
            stats.nmse_hist, stats.nmse_mean, stats.nmse_std, "NMSE", f"{stem}_nmse_hist.png"
        )
        figures.save_metric_histogram(
            stats.ssim_hist, stats.ssim_mean, stats.ssim_std, "SSIM", f"{stem}_ssim_hist.png"
        )
    print(
        f"samples={len(stats.per_sample)} "
        f"nmse_mean={stats.nmse_mean:.6g} nmse_std={stats.nmse_std:.6g} "
        f"ssim_mean={stats.ssim_mean:.6g} ssim_std={stats.ssim_std:.6g}"
    )
    return 0


def _cmd_export_figure(args) -> int:
    opt = _merge(args, {
        "tensor": (True, None, str),
        "pgm": (True, None, str),
        "range": (True, None, str),
        "png": (False, None, str),
    })
    values = _read_raster(opt["tensor"])
    lo, hi = _parse_range(opt["range"])
    export_pgm(values, opt["pgm"], (lo, hi))
    if opt["png"]:
        figures.save_raster_png(values, opt["png"], value_range=(lo, hi))
    print(f"wrote {opt['pgm']}")
    return 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _add_options(sub, names):
    sub.add_argument("--config", default=None, help="JSON config file with defaults")
    for name in names:
        kwargs = {"default": None}
        if name in ("no-figures",):
            kwargs = {"action": "store_true", "default": None}
        sub.add_argument(f"--{name}", dest=name.replace("-", "_"), **kwargs)


_COMMANDS = {
    "plan": (_cmd_plan, ["N", "a", "lambda", "out"]),
    "simulate": (_cmd_simulate, ["source", "N", "a", "lambda", "delta", "seed", "out"]),
    "invert": (_cmd_invert, ["farfield", "plan", "n", "out"]),
    "gen-disks": (
        _cmd_gen_disks,
        ["count", "N", "delta", "seed", "split", "out-dir", "a", "n", "lambda",
         "count-min", "count-max", "radius-min", "radius-max",
         "amplitude-min", "amplitude-max", "workers"],
    ),
    "gen-rasters": (
        _cmd_gen_rasters,
        ["idx-path", "count", "N", "delta", "seed", "split", "out-dir", "lambda", "workers"],
    ),
    "eval": (
        _cmd_eval,
        ["manifest", "pred-dir", "truth-dir", "split", "out-csv", "bins", "no-figures"],
    ),
    "export-figure": (_cmd_export_figure, ["tensor", "pgm", "range", "png"]),
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="ispkit", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, (_fn, options) in _COMMANDS.items():
        _add_options(subparsers.add_parser(name), options)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required (see --help)")
        handler = _COMMANDS[args.command][0]
        return handler(args)
    except _UsageError as exc:
        print(f"ispkit: error: usage: {exc}", file=sys.stderr)
        return 2
    except ISPKitError as exc:
        print(f"ispkit: error: data: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ispkit: error: io: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
