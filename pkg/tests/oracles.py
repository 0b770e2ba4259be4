"""Independent brute-force reference implementations used to pin the library.

Everything here favors explicit loops over vectorization on purpose: these
are the oracles the fast implementations are checked against, so they must
not share code paths (in particular, no np.fft).
"""

from __future__ import annotations

import cmath
import math

import numpy as np


def loop_collapse(data: np.ndarray, weights) -> np.ndarray:
    layers, features, steps = data.shape
    out = np.zeros((features, steps))
    for l in range(layers):
        for f in range(features):
            for t in range(steps):
                out[f, t] += float(weights[l]) * float(data[l, f, t])
    return out


def make_window(window: int, kind: str) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(window)
    return np.array([0.5 - 0.5 * math.cos(2.0 * math.pi * n / window) for n in range(window)])


def loop_stft(x, window: int, hop: int, win) -> np.ndarray:
    """Per-frame, per-bin complex DFT sums; (K, n_frames)."""
    x = list(map(float, x))
    if len(x) < window:
        x = x + [0.0] * (window - len(x))
    n_frames = (len(x) - window) // hop + 1
    k_bins = window // 2 + 1
    out = np.zeros((k_bins, n_frames), dtype=complex)
    for m in range(n_frames):
        for k in range(k_bins):
            acc = 0j
            for n in range(window):
                acc += win[n] * x[m * hop + n] * cmath.exp(-2j * math.pi * k * n / window)
            out[k, m] = acc
    return out


def loop_mtb(data, weights, window: int, hop: int, win, epsilon: float) -> np.ndarray:
    """collapse -> per-channel STFT -> frame-mean energy -> log."""
    collapsed = loop_collapse(np.asarray(data, dtype=np.float64), weights)
    features = collapsed.shape[0]
    k_bins = window // 2 + 1
    out = np.zeros((features, k_bins))
    for f in range(features):
        spec = loop_stft(collapsed[f], window, hop, win)
        for k in range(k_bins):
            energy = sum(abs(spec[k, m]) ** 2 for m in range(spec.shape[1])) / spec.shape[1]
            out[f, k] = math.log(energy + epsilon)
    return out


def loop_mean(values) -> float:
    total = 0.0
    count = 0
    for v in values:
        total += float(v)
        count += 1
    return total / count


def counting_rates(bona, spoof, threshold: float) -> tuple[float, float]:
    far = sum(1 for s in spoof if s >= threshold) / len(spoof)
    frr = sum(1 for s in bona if s < threshold) / len(bona)
    return far, frr


def counting_roc(bona, spoof) -> tuple[list[float], list[float], list[float]]:
    thresholds = sorted(set(list(bona) + list(spoof)))
    thresholds.append(thresholds[-1] + 1.0)
    fars, frrs = [], []
    for th in thresholds:
        far, frr = counting_rates(bona, spoof, th)
        fars.append(far)
        frrs.append(frr)
    return thresholds, fars, frrs


def brute_eer(bona, spoof) -> float:
    """(FAR+FRR)/2 at the swept threshold minimizing |FAR-FRR|."""
    best = None
    for th in counting_roc(bona, spoof)[0]:
        far, frr = counting_rates(bona, spoof, th)
        gap = abs(far - frr)
        if best is None or gap < best[0]:
            best = (gap, (far + frr) / 2.0)
    return best[1]


def confusion_f1(labels, scores, threshold: float, positive: str) -> float:
    tp = fp = fn = 0
    for lab, sc in zip(labels, scores):
        pred_accept = sc >= threshold
        pred_positive = pred_accept if positive == "bonafide" else not pred_accept
        is_positive = lab == positive
        if pred_positive and is_positive:
            tp += 1
        elif pred_positive and not is_positive:
            fp += 1
        elif not pred_positive and is_positive:
            fn += 1
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2.0 * tp / denom


def straightline_score(params, v, dropout_mask=None, dropout_p: float = 0.25) -> float:
    """Head forward with explicit loops, from a pooled vector onward."""
    hidden = params.w1.shape[0]
    z2 = float(params.b2)
    for i in range(hidden):
        z1 = float(params.b1[i])
        for j in range(len(v)):
            z1 += float(params.w1[i, j]) * float(v[j])
        h = max(z1, 0.0)
        if dropout_mask is not None:
            h = h * float(dropout_mask[i]) / (1.0 - dropout_p)
        z2 += float(params.w2[i]) * h
    return 1.0 / (1.0 + math.exp(-z2))


def central_difference(fun, params, field: str, index, step: float = 1e-4) -> float:
    """d fun / d params.<field>[index] by central differences on copies."""
    plus = params.copy()
    minus = params.copy()
    if field == "b2":
        plus.b2 += step
        minus.b2 -= step
    else:
        getattr(plus, field)[index] += step
        getattr(minus, field)[index] -= step
    return (fun(plus) - fun(minus)) / (2.0 * step)
