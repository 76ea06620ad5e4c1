"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure (single machine-parsable error
line), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import echo_config, load_config_file, merge_config, reject_unknown_keys, require_keys
from .errors import StereoWeatherError

log = logging.getLogger("stereoweather")

GENERATE_PIPELINE_KEYS = {
    "steps", "scheduler", "guidance_scale", "seed", "conditioning_scale",
    "dfm", "backends", "endpoints", "workers",
}
GENERATE_RUN_KEYS = {"src_root", "split", "out_root", "conditions", "backend"}
TRAIN_KEYS = {"lr", "steps", "batch_size", "K", "D", "gamma", "seed"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stereoweather",
        description="Adverse-weather stereo data generation, training, and evaluation.",
    )
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="stylize a source dataset into weather conditions")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--src-root", default=None)
    p.add_argument("--split", default=None)
    p.add_argument("--out-root", default=None)
    p.add_argument("--conditions", default=None, help="comma list, e.g. rainy,foggy")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--backend", choices=["mock", "real"], default=None)

    p = sub.add_parser("eval", help="EPE/D1 evaluation of a prediction directory")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-root", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--d1-mode", choices=["and", "or"], default="and")
    p.add_argument("--frame-weighted", action="store_true")
    p.add_argument("--out", required=True, help="report JSON path")

    p = sub.add_parser("train-toy", help="train the toy matcher on a dataset split")
    p.add_argument("--config", default=None)
    p.add_argument("--data-root", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--K", type=int, default=None, help="refinement iterations")
    p.add_argument("--D", type=int, default=None, help="quarter-res disparity range")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pred-out", default=None, help="also dump PFM predictions here")

    p = sub.add_parser("inspect-features", help="per-scale feature stats and PCA images")
    p.add_argument("--image", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--checkpoint", default=None, help="encoder checkpoint; random init if absent")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("make-synthetic", help="build a warped-texture dataset with exact GT")
    p.add_argument("--out-root", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--resolution", required=True, help="HxW, divisible by 32 (e.g. 96x192)")
    p.add_argument("--pattern", default="constant,gradient",
                   help="comma list of constant|gradient|blocky")
    p.add_argument("--split", default="train")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-disparity", type=float, default=16.0)

    return parser


def _cmd_generate(args) -> int:
    from .core.manifest import load_manifest
    from .datagen.config import BackendIds, GenerationConfig
    from .datagen.pipeline import run_pipeline

    doc = load_config_file(args.config)
    reject_unknown_keys(doc, GENERATE_PIPELINE_KEYS | GENERATE_RUN_KEYS, "generate")
    doc = merge_config(doc, {
        "src_root": args.src_root,
        "split": args.split,
        "out_root": args.out_root,
        "conditions": args.conditions,
        "seed": args.seed,
        "backend": args.backend,
    })
    require_keys(doc, ["src_root", "split", "out_root", "conditions"], "generate")

    conditions = doc["conditions"]
    if isinstance(conditions, str):
        conditions = [c.strip() for c in conditions.split(",") if c.strip()]

    pipeline_doc = {k: v for k, v in doc.items() if k in GENERATE_PIPELINE_KEYS}
    backend_kind = doc.get("backend")
    if backend_kind == "mock":
        pipeline_doc["backends"] = {"diffusion": "mock-diffusion", "depth": "mock-depth",
                                    "prompt": "mock-prompt"}
    elif backend_kind == "real":
        pipeline_doc["backends"] = {"diffusion": "http-diffusion", "depth": "http-depth",
                                    "prompt": "http-prompt"}
    cfg = GenerationConfig.from_dict(pipeline_doc)

    manifest = load_manifest(doc["src_root"], doc["split"])
    report = run_pipeline(manifest, conditions, cfg, backends=None, out_root=doc["out_root"])

    resolved = dict(cfg.to_dict())
    resolved.update({
        "src_root": str(doc["src_root"]), "split": doc["split"],
        "out_root": str(doc["out_root"]), "conditions": conditions,
        "backend": backend_kind or "mock",
    })
    echo_config(resolved, doc["out_root"])
    log.info("generated %d pairs, skipped %d", report.generated, len(report.skipped))
    print(f"generated={report.generated} skipped={len(report.skipped)}")
    return 0


def _cmd_eval(args) -> int:
    from .core.manifest import load_manifest
    from .evaluation.evaluate import aggregate, evaluate

    manifest = load_manifest(args.gt_root, args.split)
    result = evaluate(Path(args.pred_dir), manifest, d1_mode=args.d1_mode)
    report = aggregate(result.records, frame_weighted=args.frame_weighted)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "records": [vars(r) for r in result.records],
        "failures": list(result.failures),
        "report": report.to_dict(),
    }
    out_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    echo_config({
        "pred_dir": str(args.pred_dir), "gt_root": str(args.gt_root), "split": args.split,
        "d1_mode": args.d1_mode, "frame_weighted": args.frame_weighted, "out": str(args.out),
    }, out_path.parent)
    print(report.to_text())
    if result.failures:
        print(f"failures: {len(result.failures)} (see {out_path})")
    return 0


def _cmd_train_toy(args) -> int:
    from .core.manifest import load_manifest, load_sample
    from .core.pfm import write_pfm
    from .stereonet.model import predict, save_matcher
    from .stereonet.train import TrainConfig, build_model, train

    doc = load_config_file(args.config)
    reject_unknown_keys(doc, TRAIN_KEYS, "train-toy")
    doc = merge_config(doc, {
        "lr": args.lr, "steps": args.steps, "batch_size": args.batch_size,
        "K": args.K, "D": args.D, "gamma": args.gamma, "seed": args.seed,
    })
    cfg = TrainConfig(**doc)

    manifest = load_manifest(args.data_root, args.split)
    samples = [load_sample(entry) for entry in manifest]
    model = build_model(cfg)
    history = train(model, samples, cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_matcher(model, out_dir / "model.pt")
    (out_dir / "loss_history.json").write_text(json.dumps(history) + "\n")
    resolved = dict(cfg.to_dict())
    resolved.update({"data_root": str(args.data_root), "split": args.split,
                     "out_dir": str(args.out_dir), "pred_out": args.pred_out})
    echo_config(resolved, out_dir)

    if args.pred_out:
        pred_dir = Path(args.pred_out)
        pred_dir.mkdir(parents=True, exist_ok=True)
        for sample in samples:
            write_pfm(predict(model, sample), pred_dir / f"{sample.id}.pfm")
    print(f"steps={cfg.steps} final_loss={history[-1]:.4f}")
    return 0


def _cmd_inspect_features(args) -> int:
    import numpy as np
    import torch

    from .core.manifest import read_image
    from .encoder.inspect import feature_statistics, save_pca_image
    from .encoder.robust import FeaturePyramid, RobustEncoder, load_encoder

    encoder = load_encoder(args.checkpoint) if args.checkpoint else RobustEncoder(seed=args.seed)
    encoder.eval()

    image = read_image(args.image)
    pad_h = (-image.shape[1]) % 32
    pad_w = (-image.shape[2]) % 32
    if pad_h or pad_w:
        image = np.pad(image, ((0, 0), (0, pad_h), (0, pad_w)), mode="edge")

    with torch.no_grad():
        pyramid: FeaturePyramid = encoder(torch.from_numpy(image))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = feature_statistics(pyramid)
    (out_dir / "stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    for scale in pyramid.scales:
        save_pca_image(pyramid[scale], out_dir / f"f{scale}_pca.png", upscale=scale)
    echo_config({"image": str(args.image), "out_dir": str(args.out_dir),
                 "checkpoint": args.checkpoint, "seed": args.seed}, out_dir)
    for scale, row in stats.items():
        print(f"f{scale}: shape={row['shape']} mean={row['mean']:.4f} std={row['std']:.4f}")
    return 0


def _cmd_make_synthetic(args) -> int:
    from .synthetic import make_synthetic

    try:
        h, w = (int(v) for v in args.resolution.lower().split("x"))
    except ValueError:
        raise StereoWeatherError(f"bad --resolution {args.resolution!r}, expected HxW")
    manifest = make_synthetic(
        args.out_root, args.count, (h, w), args.pattern,
        split=args.split, seed=args.seed, max_disparity=args.max_disparity,
    )
    echo_config({
        "out_root": str(args.out_root), "count": args.count, "resolution": args.resolution,
        "pattern": args.pattern, "split": args.split, "seed": args.seed,
        "max_disparity": args.max_disparity,
    }, args.out_root)
    print(f"wrote {len(manifest)} pairs under {args.out_root}/{args.split}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "eval": _cmd_eval,
    "train-toy": _cmd_train_toy,
    "inspect-features": _cmd_inspect_features,
    "make-synthetic": _cmd_make_synthetic,
}


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help (0) and usage errors (2)
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level.upper())
    try:
        return _COMMANDS[args.command](args)
    except StereoWeatherError as exc:
        print(f"error class={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error class={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
