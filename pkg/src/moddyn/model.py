"""Detection head: pooled representation -> two FC layers -> sigmoid score.

Two pooling paths feed the same head. The "raw" variant time-averages the
layer-collapsed representation; the "proposed" variant averages the log
modulation energies over frequency. Gradients are exact chain rule all the
way back to the layer weights, including through the STFT, which is what
lets finite differences certify them.

Label convention: bonafide = 1 (the weighted positive class), spoof = 0;
the score is the probability of bonafide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .modulation import MtbConfig, _channel_energies, layer_collapse, pool_raw
from .stackio import RepresentationStack

VARIANTS = ("raw", "proposed")

LABEL_BONAFIDE = 1
LABEL_SPOOF = 0


@dataclass
class ModelParams:
    """Learnable state: per-layer weights plus the two FC layers."""

    variant: str
    layer_weights: np.ndarray  # (L,)
    w1: np.ndarray  # (H, F)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H,), single output unit
    b2: float

    @property
    def layers(self) -> int:
        return self.layer_weights.shape[0]

    @property
    def features(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        arrays = [self.layer_weights, self.w1, self.b1, self.w2, np.asarray(self.b2)]
        if not all(np.isfinite(a).all() for a in arrays):
            raise ValidationError("model parameters contain non-finite values")
        h, f = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape != (h,):
            raise ValidationError("FC layer shapes are inconsistent")

    def copy(self) -> "ModelParams":
        return ModelParams(
            variant=self.variant,
            layer_weights=self.layer_weights.copy(),
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w2=self.w2.copy(),
            b2=float(self.b2),
        )


@dataclass
class TrainExample:
    stack: RepresentationStack
    label: int  # 1 = bonafide, 0 = spoof


@dataclass
class Gradients:
    layer_weights: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


def init_params(
    variant: str,
    layers: int,
    features: int,
    hidden: int = 128,
    rng: np.random.Generator | None = None,
) -> ModelParams:
    """Glorot-uniform FC weights, zero biases, equal layer weights 1/L."""
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    rng = rng if rng is not None else np.random.default_rng()
    a1 = np.sqrt(6.0 / (features + hidden))
    a2 = np.sqrt(6.0 / (hidden + 1))
    return ModelParams(
        variant=variant,
        layer_weights=np.full(layers, 1.0 / layers, dtype=np.float64),
        w1=rng.uniform(-a1, a1, size=(hidden, features)),
        b1=np.zeros(hidden, dtype=np.float64),
        w2=rng.uniform(-a2, a2, size=hidden),
        b2=0.0,
    )


def sigmoid(z: float) -> float:
    # split on sign for numerical stability at large |z|
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def _check_dims(params: ModelParams, stack: RepresentationStack) -> None:
    if params.layers != stack.layers:
        raise DimensionError(
            f"model has {params.layers} layer weights, stack has {stack.layers} layers"
        )
    if params.features != stack.features:
        raise DimensionError(
            f"model expects {params.features} features, stack has {stack.features}"
        )


def forward(
    params: ModelParams,
    stack: RepresentationStack,
    cfg: MtbConfig,
    dropout_mask: np.ndarray | None = None,
    dropout_p: float = 0.25,
) -> tuple[float, dict]:
    """Score a stack; returns (score, cache) where cache feeds `backward`.

    With a dropout mask the hidden activations are scaled by mask/(1-p)
    (inverted dropout); without one the pass is deterministic inference.
    """
    _check_dims(params, stack)
    collapsed = layer_collapse(stack, params.layer_weights)
    cache: dict = {"collapsed": collapsed, "dropout_p": dropout_p}

    if params.variant == "raw":
        v = pool_raw(collapsed)
    else:
        energies, ctx = _channel_energies(collapsed, cfg, stack.frame_rate)
        values = np.log(energies + cfg.epsilon)
        v = values.mean(axis=1)
        cache["energies"] = energies
        cache["ctx"] = ctx

    z1 = params.w1 @ v + params.b1
    h = np.maximum(z1, 0.0)
    if dropout_mask is not None:
        mask = np.asarray(dropout_mask, dtype=np.float64)
        if mask.shape != h.shape:
            raise DimensionError(f"dropout mask shape {mask.shape} != hidden shape {h.shape}")
        h_out = h * mask / (1.0 - dropout_p)
    else:
        mask = None
        h_out = h
    z2 = float(params.w2 @ h_out + params.b2)
    score = sigmoid(z2)
    cache.update({"v": v, "z1": z1, "h": h, "mask": mask, "h_out": h_out, "score": score})
    return score, cache


def predict_score(params: ModelParams, stack: RepresentationStack, cfg: MtbConfig) -> float:
    """Deterministic inference-mode score (dropout disabled)."""
    score, _ = forward(params, stack, cfg)
    return score


def loss(score: float, label: int, w_genuine: float = 10.0) -> float:
    """Class-weighted binary cross entropy; genuine (label 1) term scaled up."""
    if not 0.0 < score < 1.0:
        raise ValidationError(f"score {score!r} outside the open interval (0,1)")
    if label not in (0, 1):
        raise ValidationError(f"label must be 0 or 1, got {label!r}")
    if not w_genuine > 0:
        raise ValidationError(f"w_genuine must be positive, got {w_genuine}")
    return -(w_genuine * label * np.log(score) + (1 - label) * np.log(1.0 - score))


def _mtb_grad_to_collapsed(dv: np.ndarray, cache: dict, cfg: MtbConfig, t: int) -> np.ndarray:
    """Backpropagate d(loss)/d(pooled modulation vector) to the collapsed (F, T) signal.

    Chain: mean over bins -> log -> mean of |STFT|^2 over frames -> linear STFT.
    For each frame, d|X_k|^2/dx[n] = 2*Re(conj(X_k) * win[n] * exp(-2i pi k n / W));
    the one-sided bins each appear once in the energy sum, so no hermitian
    doubling is applied.
    """
    ctx = cache["ctx"]
    energies = cache["energies"]
    window, hop, win = ctx["window"], ctx["hop"], ctx["win"]
    spectra = ctx["spectra"]  # (F, n_frames, K)
    n_frames = ctx["n_frames"]
    t_pad = ctx["t_pad"]
    n_features, k_bins = energies.shape

    # d(pooled)/d(log-energy) = 1/K, d(log)/dE = 1/(E+eps), d(mean over frames) = 1/n_frames
    g = dv[:, None] / k_bins / (energies + cfg.epsilon) / n_frames  # (F, K)

    full = np.zeros((n_features, n_frames, window), dtype=np.complex128)
    full[..., :k_bins] = 2.0 * g[:, None, :] * spectra
    frame_grads = np.fft.ifft(full, axis=-1).real * window  # (F, n_frames, W)
    frame_grads *= win

    d_collapsed = np.zeros((n_features, t_pad), dtype=np.float64)
    for m in range(n_frames):
        d_collapsed[:, m * hop : m * hop + window] += frame_grads[:, m, :]
    return d_collapsed[:, :t]


def backward(
    params: ModelParams,
    stack: RepresentationStack,
    cfg: MtbConfig,
    label: int,
    dropout_mask: np.ndarray | None = None,
    dropout_p: float = 0.25,
    w_genuine: float = 10.0,
) -> tuple[float, Gradients]:
    """Loss and exact gradients of the weighted BCE for one example."""
    score, cache = forward(params, stack, cfg, dropout_mask, dropout_p)
    value = loss(score, label, w_genuine)

    # d(loss)/d(pre-sigmoid) folds the sigmoid derivative into the BCE terms
    dz2 = -w_genuine * label * (1.0 - score) + (1 - label) * score
    h_out, h, z1, v, mask = cache["h_out"], cache["h"], cache["z1"], cache["v"], cache["mask"]

    dw2 = dz2 * h_out
    db2 = dz2
    dh_out = dz2 * params.w2
    if mask is not None:
        dh = dh_out * mask / (1.0 - dropout_p)
    else:
        dh = dh_out
    da = dh * (z1 > 0.0)
    dw1 = np.outer(da, v)
    db1 = da
    dv = params.w1.T @ da

    if params.variant == "raw":
        d_collapsed = np.repeat(dv[:, None] / stack.time_steps, stack.time_steps, axis=1)
    else:
        d_collapsed = _mtb_grad_to_collapsed(dv, cache, cfg, stack.time_steps)

    d_weights = np.tensordot(
        stack.data.astype(np.float64, copy=False), d_collapsed, axes=([1, 2], [0, 1])
    )
    grads = Gradients(layer_weights=d_weights, w1=dw1, b1=db1, w2=dw2, b2=float(db2))
    return value, grads


def sgd_step(params: ModelParams, grads: Gradients, lr: float) -> None:
    """In-place plain SGD update."""
    params.layer_weights -= lr * grads.layer_weights
    params.w1 -= lr * grads.w1
    params.b1 -= lr * grads.b1
    params.w2 -= lr * grads.w2
    params.b2 = float(params.b2 - lr * grads.b2)
