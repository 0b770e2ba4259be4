"""Wav loading normalized to float32 mono at the encoder's 16 kHz."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import AudioFormatError, SampleRateError

ENCODER_RATE = 16000

_PEAKS = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
    np.dtype(np.uint8): 128.0,
}


def load_wave(path: str | Path, resample: bool = False) -> np.ndarray:
    """Samples in [-1, 1] at 16 kHz; non-16 kHz input needs resample=True."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise AudioFormatError(f"{path}: not a readable wav file: {exc}") from exc
    if data.ndim != 1:
        raise AudioFormatError(
            f"{path}: need mono audio, got {data.shape[1]} channels"
        )
    if data.size == 0:
        raise AudioFormatError(f"{path}: empty audio")

    if data.dtype in _PEAKS:
        wave = data.astype(np.float32)
        if data.dtype == np.dtype(np.uint8):
            wave -= 128.0
        wave /= _PEAKS[data.dtype]
    else:
        wave = data.astype(np.float32)

    if rate != ENCODER_RATE:
        if not resample:
            raise SampleRateError(
                f"{path}: sampled at {rate} Hz, encoder expects {ENCODER_RATE}; "
                "enable resampling to convert"
            )
        g = math.gcd(ENCODER_RATE, rate)
        wave = resample_poly(wave, ENCODER_RATE // g, rate // g).astype(np.float32)
    return wave
