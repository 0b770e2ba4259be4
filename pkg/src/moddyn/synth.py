"""Synthetic stacks with a planted amplitude modulation on part of the channels.

Each channel is Gaussian noise around a per-channel random mean. The
"modulated" class multiplies a leading block of feature channels by
1 + depth*sin(2*pi*f_mod*t + phase), a zero-mean AM, so the time average of
every channel is unchanged in expectation while the modulation spectrum
gains a peak at f_mod. That makes the two classes separable through the
modulation path and indistinguishable to plain time pooling.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .stackio import (
    DatasetManifest,
    ManifestEntry,
    RepresentationStack,
    SPLITS,
    write_manifest,
    write_stack,
)

CLASS_NAMES = ("clean", "modulated")

# default modulation frequency is the first bin center of the default
# 128 ms window at 50 Hz (50/6 Hz), inside the 7-12 Hz band of interest
DEFAULT_MOD_FREQ = 50.0 / 6.0


@dataclass
class SynthSpec:
    layers: int = 3
    features: int = 32
    time_steps: int = 250
    frame_rate: float = 50.0
    mod_freq: float = DEFAULT_MOD_FREQ
    mod_depth: float = 0.5
    affected_fraction: float = 0.25
    noise_std: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if min(self.layers, self.features, self.time_steps) < 1:
            raise ValidationError("layers, features and time_steps must be >= 1")
        if not self.frame_rate > 0:
            raise ValidationError(f"frame_rate must be positive, got {self.frame_rate}")
        if not 0.0 < self.mod_freq < self.frame_rate / 2.0:
            raise ValidationError(
                f"mod_freq must lie in (0, frame_rate/2), got {self.mod_freq}"
            )
        if self.mod_depth < 0:
            raise ValidationError(f"mod_depth must be >= 0, got {self.mod_depth}")
        if not 0.0 <= self.affected_fraction <= 1.0:
            raise ValidationError(
                f"affected_fraction must be in [0, 1], got {self.affected_fraction}"
            )
        if not self.noise_std > 0:
            raise ValidationError(f"noise_std must be positive, got {self.noise_std}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")

    def affected_channels(self) -> int:
        return math.ceil(self.affected_fraction * self.features)


def gen_stack(spec: SynthSpec, kind: str, rng: np.random.Generator) -> RepresentationStack:
    """One stack of the given class ("clean" or "modulated") from the given rng.

    Channel means carry a per-feature sign shared across layers and a
    per-channel magnitude in [4, 5]. Means of that size put the planted AM
    line (amplitude mean*depth) well above the per-bin noise floor while
    leaving the time average of every channel unbiased, so the classes
    separate through modulation energy and nowhere else. Draw order is
    fixed (signs, magnitudes, noise, phases) so mod_depth = 0 reproduces
    the clean stack bit for bit from the same rng state.
    """
    spec.validate()
    if kind not in CLASS_NAMES:
        raise ValidationError(f"class must be one of {CLASS_NAMES}, got {kind!r}")
    n_l, n_f, n_t = spec.layers, spec.features, spec.time_steps

    signs = np.where(rng.random(n_f) < 0.5, -1.0, 1.0)
    mags = rng.uniform(4.0, 5.0, size=(n_l, n_f))
    means = signs[None, :] * mags
    data = means[:, :, None] + spec.noise_std * rng.standard_normal((n_l, n_f, n_t))

    if kind == "modulated":
        n_aff = spec.affected_channels()
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_f)
        t_sec = np.arange(n_t) / spec.frame_rate
        am = 1.0 + spec.mod_depth * np.sin(
            2.0 * np.pi * spec.mod_freq * t_sec[None, :] + phases[:n_aff, None]
        )
        data[:, :n_aff, :] *= am[None, :, :]

    return RepresentationStack(data=data.astype(np.float32), frame_rate=spec.frame_rate)


def _stack_rng(spec: SynthSpec, split_idx: int, class_idx: int, index: int) -> np.random.Generator:
    seq = np.random.SeedSequence([spec.seed, split_idx, class_idx, index])
    return np.random.Generator(np.random.PCG64(seq))


def gen_dataset(
    spec: SynthSpec,
    n_per_class_per_split: dict[str, int],
    out_dir: str | Path,
) -> DatasetManifest:
    """Write balanced stacks plus manifest under out_dir; modulated => spoof.

    Every stack gets its own seed derived from (spec.seed, split, class,
    index), so regeneration with the same spec is byte-identical and
    independent of write order.
    """
    spec.validate()
    unknown = set(n_per_class_per_split) - set(SPLITS)
    if unknown:
        raise ValidationError(f"unknown splits {sorted(unknown)}; allowed {SPLITS}")
    for split, count in n_per_class_per_split.items():
        if count < 1:
            raise ValidationError(f"split {split!r} needs a positive count, got {count}")

    out_dir = Path(out_dir)
    stacks_dir = out_dir / "stacks"
    stacks_dir.mkdir(parents=True, exist_ok=True)

    entries: list[ManifestEntry] = []
    for split_idx, split in enumerate(SPLITS):
        count = n_per_class_per_split.get(split, 0)
        for class_idx, (kind, label) in enumerate(
            (("clean", "bonafide"), ("modulated", "spoof"))
        ):
            for i in range(count):
                rng = _stack_rng(spec, split_idx, class_idx, i)
                stack = gen_stack(spec, kind, rng)
                stack_id = f"{split}-{label}-{i:04d}"
                rel_path = f"stacks/{stack_id}.repstk"
                write_stack(stack, out_dir / rel_path)
                entries.append(
                    ManifestEntry(
                        id=stack_id,
                        path=rel_path,
                        label=label,
                        attack_id="AM" if label == "spoof" else "-",
                        split=split,
                    )
                )

    manifest = DatasetManifest(entries=entries, root=out_dir)
    write_manifest(manifest, out_dir / "manifest.csv")
    (out_dir / "synth_spec.json").write_text(
        json.dumps({"spec": asdict(spec), "counts": dict(n_per_class_per_split)}, indent=2)
        + "\n"
    )
    return manifest
