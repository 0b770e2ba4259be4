"""Modulation transformation of layer-stacked speech representations.

The pipeline collapses the layer axis with learnable weights, runs a
short-time Fourier transform along time within each feature channel,
averages the per-frame energies, and takes a log. The result describes
each channel by the distribution of its rate of change (modulation
frequency) instead of by its instantaneous values.

Frame geometry: frame m covers samples [m*hop, m*hop + W); inputs shorter
than one window are zero-padded up to W. Only the one-sided spectrum
(bins 0..floor(W/2)) is kept; bin k sits at k * frame_rate / W Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DimensionError, ParseError, ValidationError
from .stackio import RepresentationStack, _atomic_write_text


@dataclass
class MtbConfig:
    """Window geometry and numeric guards for the modulation transform.

    Window and hop are given in milliseconds and converted at the stack's
    frame rate (`round(ms * rate / 1000)`); the explicit `*_frames` fields
    override the conversion when set.
    """

    window_ms: float = 128.0
    hop_ms: float = 32.0
    window_frames: int | None = None
    hop_frames: int | None = None
    window_function: str = "hann"
    epsilon: float = 1e-10

    def validate(self) -> None:
        """Check the rate-independent constraints; geometry is checked per rate."""
        if self.window_frames is None and not self.window_ms > 0:
            raise ConfigError(f"window_ms must be positive, got {self.window_ms}")
        if self.hop_frames is None and not self.hop_ms > 0:
            raise ConfigError(f"hop_ms must be positive, got {self.hop_ms}")
        if self.window_frames is not None and self.window_frames < 2:
            raise ConfigError(f"window_frames must be >= 2, got {self.window_frames}")
        if self.hop_frames is not None and self.hop_frames < 1:
            raise ConfigError(f"hop_frames must be >= 1, got {self.hop_frames}")
        if self.window_function not in ("hann", "rectangular"):
            raise ConfigError(f"unknown window_function {self.window_function!r}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")

    def frame_geometry(self, frame_rate: float) -> tuple[int, int]:
        """Return (window_frames, hop_frames) at `frame_rate`, validated."""
        if self.window_frames is not None:
            window = int(self.window_frames)
        else:
            if not self.window_ms > 0:
                raise ConfigError(f"window_ms must be positive, got {self.window_ms}")
            window = round(self.window_ms * frame_rate / 1000.0)
        if self.hop_frames is not None:
            hop = int(self.hop_frames)
        else:
            if not self.hop_ms > 0:
                raise ConfigError(f"hop_ms must be positive, got {self.hop_ms}")
            hop = round(self.hop_ms * frame_rate / 1000.0)
        if window < 2:
            raise ConfigError(f"derived window_frames must be >= 2, got {window}")
        if hop < 1:
            raise ConfigError(f"derived hop_frames must be >= 1, got {hop}")
        if hop > window:
            raise ConfigError(f"hop_frames {hop} exceeds window_frames {window}")
        if self.window_function not in ("hann", "rectangular"):
            raise ConfigError(f"unknown window_function {self.window_function!r}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        return window, hop

    def window_array(self, window_frames: int) -> np.ndarray:
        if self.window_function == "rectangular":
            return np.ones(window_frames, dtype=np.float64)
        # periodic Hann, the usual STFT analysis window
        n = np.arange(window_frames, dtype=np.float64)
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / window_frames)


@dataclass
class ModulationRepresentation:
    """Per-channel log modulation energies: (features, modulation bins)."""

    values: np.ndarray
    bin_freqs: np.ndarray

    @property
    def num_features(self) -> int:
        return self.values.shape[0]

    @property
    def num_bins(self) -> int:
        return self.values.shape[1]

    def validate(self) -> None:
        if self.values.ndim != 2:
            raise ValidationError(f"values must be 2-D, got shape {self.values.shape}")
        if self.bin_freqs.shape != (self.values.shape[1],):
            raise ValidationError("bin_freqs length must equal the number of modulation bins")
        if not np.isfinite(self.values).all():
            raise ValidationError("modulation values contain non-finite entries")
        if np.any(np.diff(self.bin_freqs) <= 0):
            raise ValidationError("bin_freqs must be strictly increasing")


def _as_weights(weights, layers: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != layers:
        raise DimensionError(f"got {w.shape[0]} layer weights for a {layers}-layer stack")
    if not np.isfinite(w).all():
        raise ValidationError("layer weights contain non-finite values")
    return w


def layer_collapse(stack: RepresentationStack, weights) -> np.ndarray:
    """Weighted sum over the layer axis: out[f, t] = sum_l w[l] * stack[l, f, t]."""
    w = _as_weights(weights, stack.layers)
    return np.tensordot(w, stack.data.astype(np.float64, copy=False), axes=(0, 0))


def frame_signal(x: np.ndarray, window_frames: int, hop_frames: int) -> np.ndarray:
    """Slice (..., T) signals into (..., n_frames, W) with zero-padding up to one window."""
    x = np.asarray(x, dtype=np.float64)
    t = x.shape[-1]
    if t < 1:
        raise DimensionError("signal must have at least one sample")
    t_pad = max(t, window_frames)
    if t_pad > t:
        pad = [(0, 0)] * (x.ndim - 1) + [(0, t_pad - t)]
        x = np.pad(x, pad)
    frames = sliding_window_view(x, window_frames, axis=-1)[..., ::hop_frames, :]
    return frames


def stft_frames(x, cfg: MtbConfig, frame_rate: float) -> np.ndarray:
    """One-sided STFT of a single channel, returned as (bins, frames).

    Bin k of frame m is sum_n win[n] * x[m*hop + n] * exp(-2i*pi*k*n/W)
    for k = 0..floor(W/2).
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    window, hop = cfg.frame_geometry(frame_rate)
    win = cfg.window_array(window)
    frames = frame_signal(x, window, hop)
    return np.fft.rfft(frames * win, axis=-1).T


def _channel_energies(
    collapsed: np.ndarray, cfg: MtbConfig, frame_rate: float
) -> tuple[np.ndarray, dict]:
    """Frame-averaged one-sided energies for every channel of (F, T) data."""
    window, hop = cfg.frame_geometry(frame_rate)
    win = cfg.window_array(window)
    frames = frame_signal(collapsed, window, hop)
    spectra = np.fft.rfft(frames * win, axis=-1)  # (F, n_frames, K)
    energies = np.mean(spectra.real**2 + spectra.imag**2, axis=1)  # (F, K)
    ctx = {
        "window": window,
        "hop": hop,
        "win": win,
        "spectra": spectra,
        "n_frames": frames.shape[-2],
        "t_pad": max(collapsed.shape[-1], window),
    }
    return energies, ctx


def mtb_transform(stack: RepresentationStack, weights, cfg: MtbConfig) -> ModulationRepresentation:
    """Full modulation transform of a stack: (F, K) log energies.

    Output shape depends only on F, the window geometry and the frame
    rate, never on T.
    """
    collapsed = layer_collapse(stack, weights)
    energies, ctx = _channel_energies(collapsed, cfg, stack.frame_rate)
    values = np.log(energies + cfg.epsilon)
    k = values.shape[1]
    bin_freqs = np.arange(k, dtype=np.float64) * stack.frame_rate / ctx["window"]
    return ModulationRepresentation(values=values, bin_freqs=bin_freqs)


def pool_raw(collapsed: np.ndarray) -> np.ndarray:
    """Average a collapsed (F, T) representation over time."""
    collapsed = np.asarray(collapsed, dtype=np.float64)
    if collapsed.ndim != 2:
        raise DimensionError(f"expected a 2-D (features, time) array, got {collapsed.shape}")
    return collapsed.mean(axis=1)


def pool_modulation(m: ModulationRepresentation) -> np.ndarray:
    """Average log modulation energies over the modulation-frequency axis."""
    return np.asarray(m.values, dtype=np.float64).mean(axis=1)


def feature_mean_pattern(
    m: ModulationRepresentation, reference: ModulationRepresentation | None = None
) -> np.ndarray:
    """Compress to one value per modulation bin by averaging over features.

    With a reference, its compressed pattern is subtracted, which is how
    a spoofed utterance is contrasted against a genuine one.
    """
    pattern = np.asarray(m.values, dtype=np.float64).mean(axis=0)
    if reference is not None:
        if reference.values.shape != m.values.shape:
            raise DimensionError(
                f"reference shape {reference.values.shape} differs from {m.values.shape}"
            )
        pattern = pattern - np.asarray(reference.values, dtype=np.float64).mean(axis=0)
    return pattern


def write_modulation_text(m: ModulationRepresentation, path) -> None:
    """Dump a modulation matrix as text: bin-frequency header row, one row per feature."""
    lines = [",".join(repr(float(f)) for f in m.bin_freqs)]
    for row in m.values:
        lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_modulation_text(path) -> ModulationRepresentation:
    """Read back a matrix written by `write_modulation_text`."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty modulation matrix")
    try:
        bin_freqs = np.array([float(v) for v in lines[0].split(",")], dtype=np.float64)
        values = np.array(
            [[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=np.float64
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if values.ndim != 2 or values.shape[1] != bin_freqs.shape[0]:
        raise ParseError(f"{path}: rows do not match the header width")
    return ModulationRepresentation(values=values, bin_freqs=bin_freqs)
