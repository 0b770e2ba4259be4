"""Audio to layer stack: run an encoder, stack hidden states, write REPSTK1."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .audio import ENCODER_RATE, load_wave
from .errors import AudioFormatError, EncoderUnavailableError, ExportError
from .repstk import write_repstk

FRAME_RATE = 50.0

# shortest input the convolutional front end accepts (one receptive field)
MIN_SAMPLES = 400


@dataclass(frozen=True)
class EncoderEntry:
    config_cls: type
    model_cls: type
    checkpoint: str


def _registry() -> dict[str, EncoderEntry]:
    from transformers import Wav2Vec2Config, Wav2Vec2Model, WavLMConfig, WavLMModel

    return {
        "wav2vec2-base-class": EncoderEntry(
            Wav2Vec2Config, Wav2Vec2Model, "facebook/wav2vec2-base-960h"
        ),
        "wavlm-base-class": EncoderEntry(
            WavLMConfig, WavLMModel, "microsoft/wavlm-base-plus"
        ),
    }


ENCODER_NAMES = ("wav2vec2-base-class", "wavlm-base-class")


@dataclass
class ExportJob:
    audio: Path
    encoder: str
    out: Path
    include_pre_projection: bool = False
    resample: bool = False


def load_encoder(name: str, random_init: bool = False, seed: int = 0):
    """Encoder in eval mode; random_init skips the checkpoint download."""
    try:
        entry = _registry()[name]
    except KeyError:
        raise ExportError(f"unknown encoder {name!r}, choose from {ENCODER_NAMES}")
    if random_init:
        torch.manual_seed(seed)
        model = entry.model_cls(entry.config_cls())
    else:
        try:
            model = entry.model_cls.from_pretrained(entry.checkpoint)
        except Exception as exc:
            raise EncoderUnavailableError(
                f"cannot load {entry.checkpoint!r} here: {exc}"
            ) from exc
    return model.eval()


def encode_stack(
    model, wave: np.ndarray, include_pre_projection: bool = False
) -> np.ndarray:
    """(layers, 768, frames) float32 from a 16 kHz waveform."""
    if wave.shape[0] < MIN_SAMPLES:
        raise AudioFormatError(
            f"audio too short: {wave.shape[0]} samples, need >= {MIN_SAMPLES}"
        )
    with torch.no_grad():
        out = model(torch.from_numpy(wave).unsqueeze(0), output_hidden_states=True)
    states = out.hidden_states
    if not include_pre_projection:
        # hidden_states[0] is the projected conv features, before any
        # transformer layer
        states = states[1:]
    return np.stack(
        [s.squeeze(0).T.numpy().astype(np.float32) for s in states], axis=0
    )


def export_stack(job: ExportJob, model=None, random_init: bool = False, seed: int = 0) -> Path:
    """Run one file end to end and return the written path."""
    if model is None:
        model = load_encoder(job.encoder, random_init=random_init, seed=seed)
    wave = load_wave(job.audio, resample=job.resample)
    stack = encode_stack(model, wave, include_pre_projection=job.include_pre_projection)
    job.out.parent.mkdir(parents=True, exist_ok=True)
    write_repstk(stack, FRAME_RATE, job.out)
    return job.out


def expected_frames(n_samples: int) -> int:
    """Output length of the 16 kHz conv front end (20 ms hop, 25 ms window)."""
    n = n_samples
    for kernel, stride in ((10, 5), (3, 2), (3, 2), (3, 2), (3, 2), (2, 2), (2, 2)):
        n = (n - kernel) // stride + 1
    return n
