"""Command-line front end: synth, transform, train, eval, compare, visualize.

Thin argparse layer over the library; every command is reproducible from its
flags plus --seed. Exit codes: 0 success, 2 usage error, 3 data or
configuration error, 4 unexpected failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import ModdynError
from .metrics import eer, f1_at_threshold, hter_significance
from .modulation import MtbConfig, feature_mean_pattern, mtb_transform, write_modulation_text
from .stackio import read_manifest, read_scores, read_stack, write_scores
from .synth import SynthSpec, gen_dataset
from .training import (
    TrainConfig,
    evaluate,
    load_checkpoint,
    load_examples,
    save_checkpoint,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def _add_mtb_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-ms", type=float, default=128.0, help="analysis window in ms")
    p.add_argument("--hop-ms", type=float, default=32.0, help="hop between windows in ms")
    p.add_argument(
        "--window-frames", type=int, default=None, help="window length in frames, overrides --window-ms"
    )
    p.add_argument(
        "--hop-frames", type=int, default=None, help="hop length in frames, overrides --hop-ms"
    )
    p.add_argument(
        "--window-function", choices=["hann", "rectangular"], default="hann",
        help="analysis window shape"
    )


def _mtb_config(args: argparse.Namespace) -> MtbConfig:
    return MtbConfig(
        window_ms=args.window_ms,
        hop_ms=args.hop_ms,
        window_frames=args.window_frames,
        hop_frames=args.hop_frames,
        window_function=args.window_function,
    )


def _equal_weights(layers: int) -> np.ndarray:
    return np.full(layers, 1.0 / layers)


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        layers=args.layers,
        features=args.features,
        time_steps=args.time_steps,
        frame_rate=args.frame_rate,
        mod_freq=args.mod_freq,
        mod_depth=args.mod_depth,
        affected_fraction=args.affected_fraction,
        noise_std=args.noise_std,
        seed=args.seed,
    )
    counts = {"train": args.n_train, "valid": args.n_valid, "eval": args.n_eval}
    manifest = gen_dataset(spec, counts, args.out)
    print(f"wrote {len(manifest.entries)} stacks, manifest {Path(args.out) / 'manifest.csv'}")
    return EXIT_OK


def cmd_transform(args: argparse.Namespace) -> int:
    cfg = _mtb_config(args)
    cfg.validate()
    manifest = read_manifest(args.manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures: list[str] = []
    for entry in manifest.entries:
        try:
            stack = read_stack(manifest.stack_path(entry))
            m = mtb_transform(stack, _equal_weights(stack.layers), cfg)
            write_modulation_text(m, out_dir / f"{entry.id}.modrep.txt")
        except (ModdynError, OSError) as exc:
            failures.append(f"{entry.id}: {exc}")
    for line in failures:
        print(f"error: {line}", file=sys.stderr)
    if failures:
        return EXIT_DATA
    print(f"wrote {len(manifest.entries)} modulation matrices to {out_dir}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    mtb_cfg = _mtb_config(args)
    cfg = TrainConfig(
        max_epochs=args.epochs,
        lr_start=args.lr_start,
        lr_end=args.lr_end,
        patience=args.patience,
        w_genuine=args.w_genuine,
        dropout_p=args.dropout_p,
        seed=args.seed,
        hidden=args.hidden,
        improvement_ref=args.improvement_ref,
    )
    manifest = read_manifest(args.manifest)
    train_examples = load_examples(manifest, "train")
    valid_examples = load_examples(manifest, "valid")
    result = train(
        train_examples,
        valid_examples,
        args.variant,
        mtb_cfg,
        cfg,
        log_stream=sys.stdout,
    )
    save_checkpoint(args.out, result.params, result.log, mtb_cfg)
    print(f"best_valid_eer={result.log.best_valid_eer:.6f}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    ckpt = load_checkpoint(args.checkpoint, expect_variant=args.variant)
    manifest = read_manifest(args.manifest)
    scores = evaluate(ckpt.params, manifest, args.split, ckpt.mtb_cfg)
    write_scores(scores, args.out)
    estimate = eer(scores)
    f1 = f1_at_threshold(scores, threshold=args.f1_threshold, positive=args.f1_positive)
    print(f"eer={estimate.value:.4f},f1={f1:.4f}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    scores_a = read_scores(args.scores_a)
    scores_b = read_scores(args.scores_b)
    result = hter_significance(
        scores_a, scores_b, threshold_a=args.threshold_a, threshold_b=args.threshold_b
    )
    flag = "true" if result.significant else "false"
    print(f"{result.hter_a:.6f},{result.hter_b:.6f},{result.z:.4f},{flag},{result.better}")
    return EXIT_OK


def cmd_visualize(args: argparse.Namespace) -> int:
    cfg = _mtb_config(args)
    cfg.validate()
    ref_stack = read_stack(args.reference)
    ref_m = mtb_transform(ref_stack, _equal_weights(ref_stack.layers), cfg)
    lines = ["stack," + ",".join(f"{f:.6g}" for f in ref_m.bin_freqs)]
    for path in args.stacks:
        stack = read_stack(path)
        m = mtb_transform(stack, _equal_weights(stack.layers), cfg)
        diff = feature_mean_pattern(m, reference=ref_m)
        lines.append(Path(path).name + "," + ",".join(f"{v:.8g}" for v in diff))
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moddyn",
        description="modulation-dynamics pipeline for spoofed-speech detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--features", type=int, default=32)
    p.add_argument("--time-steps", type=int, default=250)
    p.add_argument("--frame-rate", type=float, default=50.0)
    p.add_argument("--mod-freq", type=float, default=50.0 / 6.0)
    p.add_argument("--mod-depth", type=float, default=0.5)
    p.add_argument("--affected-fraction", type=float, default=0.25)
    p.add_argument("--noise-std", type=float, default=1.0)
    p.add_argument("--n-train", type=int, default=200, help="stacks per class in train")
    p.add_argument("--n-valid", type=int, default=50, help="stacks per class in valid")
    p.add_argument("--n-eval", type=int, default=100, help="stacks per class in eval")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("transform", help="write modulation matrices for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    _add_mtb_flags(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("train", help="train a detection head")
    p.add_argument("--manifest", required=True)
    p.add_argument("--variant", required=True, choices=["raw", "proposed"])
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--w-genuine", type=float, default=10.0)
    p.add_argument("--lr-start", type=float, default=1e-4)
    p.add_argument("--lr-end", type=float, default=1e-5)
    p.add_argument("--dropout-p", type=float, default=0.25)
    p.add_argument("--improvement-ref", choices=["best", "prev"], default="best")
    _add_mtb_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a split and report eer,f1")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="eval", choices=["train", "valid", "eval"])
    p.add_argument("--out", required=True, help="scores file path")
    p.add_argument("--variant", choices=["raw", "proposed"], default=None,
                   help="fail unless the checkpoint holds this variant")
    p.add_argument("--f1-positive", choices=["bonafide", "spoof"], default="bonafide")
    p.add_argument("--f1-threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="HTER significance test between two score files")
    p.add_argument("--scores-a", required=True)
    p.add_argument("--scores-b", required=True)
    p.add_argument(
        "--threshold-a", type=float, default=None,
        help="operating point for A, default its EER threshold",
    )
    p.add_argument(
        "--threshold-b", type=float, default=None,
        help="operating point for B, default its EER threshold",
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("visualize", help="feature-averaged modulation patterns vs a reference")
    p.add_argument("stacks", nargs="+", help="stack files to pattern")
    p.add_argument("--reference", required=True, help="clean reference stack")
    p.add_argument("--out", default=None, help="write table here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    _add_mtb_flags(p)
    p.set_defaults(func=cmd_visualize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (ModdynError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
