"""Command line front end: one wav file or a directory of them to REPSTK1."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ExportError
from .export import ENCODER_NAMES, ExportJob, export_stack, load_encoder

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="encoder-export",
        description="Export speech-encoder hidden-state stacks as REPSTK1 files",
    )
    parser.add_argument("--audio", required=True, help="wav file or directory of wav files")
    parser.add_argument("--encoder", required=True, choices=ENCODER_NAMES)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--include-pre-projection",
        action="store_true",
        help="also keep the layer before the first transformer block",
    )
    parser.add_argument(
        "--resample",
        action="store_true",
        help="convert non-16 kHz input instead of failing",
    )
    parser.add_argument(
        "--random-init",
        action="store_true",
        help="randomly initialized encoder, for offline format checks",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for --random-init")
    return parser


def _audio_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".wav")
        if not files:
            raise ExportError(f"{path}: directory holds no .wav files")
        return files
    return [path]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK

    try:
        files = _audio_files(Path(args.audio))
        model = load_encoder(args.encoder, random_init=args.random_init, seed=args.seed)
        out_dir = Path(args.out)
        for wav in files:
            job = ExportJob(
                audio=wav,
                encoder=args.encoder,
                out=out_dir / f"{wav.stem}.repstk",
                include_pre_projection=args.include_pre_projection,
                resample=args.resample,
            )
            export_stack(job, model=model)
            print(f"wrote {job.out}")
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
