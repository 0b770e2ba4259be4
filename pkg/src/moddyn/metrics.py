"""Detection metrics over score sets: ROC sweep, EER, F1, HTER comparison.

Scores are probabilities of the bonafide class. A threshold accepts
(predicts bonafide) when score >= threshold, so FAR counts spoof scores at
or above it and FRR counts bonafide scores below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MetricDomainError, ValidationError
from .stackio import ScoreSet

ALPHA = 0.05
# two-sided normal critical value for ALPHA; fixed, not configurable
Z_CRIT = 1.96

F1_POSITIVE_CLASSES = ("bonafide", "spoof")


@dataclass
class RocCurve:
    """Operating points swept over every distinct score plus a top sentinel."""

    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray

    def __len__(self) -> int:
        return self.thresholds.shape[0]


@dataclass
class EerEstimate:
    value: float
    threshold: float


@dataclass
class SignificanceResult:
    hter_a: float
    hter_b: float
    z: float
    significant: bool
    better: str  # "A", "B", or "tie" when not significant
    alpha: float = ALPHA


def _split_scores(score_set: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(score_set.labels())
    scores = np.asarray(score_set.scores(), dtype=np.float64)
    bona = scores[labels == "bonafide"]
    spoof = scores[labels == "spoof"]
    if bona.size == 0 or spoof.size == 0:
        raise MetricDomainError(
            f"need both classes present, got {bona.size} bonafide / {spoof.size} spoof"
        )
    return bona, spoof


def roc_points(score_set: ScoreSet) -> RocCurve:
    """FAR/FRR at each distinct score, plus max+1 so the sweep reaches (0, 1)."""
    bona, spoof = _split_scores(score_set)
    distinct = np.unique(np.concatenate([bona, spoof]))
    thresholds = np.concatenate([distinct, [distinct[-1] + 1.0]])
    # vectorised counting: for each threshold, #spoof >= t and #bona < t
    far = (spoof[None, :] >= thresholds[:, None]).sum(axis=1) / spoof.size
    frr = (bona[None, :] < thresholds[:, None]).sum(axis=1) / bona.size
    return RocCurve(thresholds=thresholds, far=far.astype(np.float64), frr=frr.astype(np.float64))


def eer(score_set: ScoreSet) -> EerEstimate:
    """Equal error rate by linear interpolation between adjacent operating points.

    Interpolation happens in rate space, so the estimate depends only on the
    ordering of scores and survives any strictly increasing score transform.
    """
    curve = roc_points(score_set)
    diff = curve.far - curve.frr  # non-increasing from +1 to -1
    idx = int(np.argmax(diff <= 0.0))
    if diff[idx] == 0.0:
        return EerEstimate(value=float(curve.far[idx]), threshold=float(curve.thresholds[idx]))
    # crossing lies strictly between idx-1 and idx
    d1, d2 = diff[idx - 1], diff[idx]
    alpha = d1 / (d1 - d2)
    value = curve.far[idx - 1] + alpha * (curve.far[idx] - curve.far[idx - 1])
    threshold = curve.thresholds[idx - 1] + alpha * (
        curve.thresholds[idx] - curve.thresholds[idx - 1]
    )
    return EerEstimate(value=float(value), threshold=float(threshold))


def f1_at_threshold(
    score_set: ScoreSet,
    threshold: float = 0.5,
    positive: str = "bonafide",
) -> float:
    """F1 of the chosen positive class at a fixed decision threshold.

    With bonafide positive, an example is predicted positive when its score
    is at or above the threshold; with spoof positive, when it is below.
    """
    if positive not in F1_POSITIVE_CLASSES:
        raise ValidationError(f"positive class must be one of {F1_POSITIVE_CLASSES}, got {positive!r}")
    labels = np.asarray(score_set.labels())
    scores = np.asarray(score_set.scores(), dtype=np.float64)
    if labels.size == 0:
        raise MetricDomainError("empty score set")
    accept = scores >= threshold
    actual = labels == positive
    predicted = accept if positive == "bonafide" else ~accept
    if not actual.any():
        raise MetricDomainError(f"no {positive} examples present, F1 undefined")
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2.0 * tp / denom


def rates_at_threshold(score_set: ScoreSet, threshold: float) -> tuple[float, float]:
    """(FAR, FRR) of a score set at a fixed decision threshold."""
    bona, spoof = _split_scores(score_set)
    far = float(np.sum(spoof >= threshold)) / spoof.size
    frr = float(np.sum(bona < threshold)) / bona.size
    return far, frr


def _hter_variance(far: float, frr: float, n_spoof: int, n_bona: int) -> float:
    return far * (1.0 - far) / (4.0 * n_spoof) + frr * (1.0 - frr) / (4.0 * n_bona)


def hter_significance(
    scores_a: ScoreSet,
    scores_b: ScoreSet,
    threshold_a: float | None = None,
    threshold_b: float | None = None,
) -> SignificanceResult:
    """Compare two systems by HTER with a two-sided normal test at alpha 0.05.

    Each system is judged at its own operating point; a threshold left as
    None falls back to that system's EER threshold. The verdict is a tie
    unless the gap clears the critical value; only then does the lower HTER
    name a better system.
    """
    bona_a, spoof_a = _split_scores(scores_a)
    bona_b, spoof_b = _split_scores(scores_b)
    if threshold_a is None:
        threshold_a = eer(scores_a).threshold
    if threshold_b is None:
        threshold_b = eer(scores_b).threshold
    far_a, frr_a = rates_at_threshold(scores_a, threshold_a)
    far_b, frr_b = rates_at_threshold(scores_b, threshold_b)
    hter_a = (far_a + frr_a) / 2.0
    hter_b = (far_b + frr_b) / 2.0
    var = _hter_variance(far_a, frr_a, spoof_a.size, bona_a.size) + _hter_variance(
        far_b, frr_b, spoof_b.size, bona_b.size
    )
    gap = hter_a - hter_b
    if var > 0.0:
        z = gap / math.sqrt(var)
    else:
        z = 0.0 if gap == 0.0 else math.copysign(math.inf, gap)
    significant = abs(z) > Z_CRIT
    if not significant:
        better = "tie"
    else:
        better = "A" if hter_a < hter_b else "B"
    return SignificanceResult(
        hter_a=float(hter_a),
        hter_b=float(hter_b),
        z=float(z),
        significant=significant,
        better=better,
    )
