"""Per-utterance SGD with linear LR decay and early stopping on valid EER.

One seeded generator drives everything random (parameter init, epoch
shuffles, dropout masks), so a (seed, data, config) triple pins the entire
run, including which parameters come back as best.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from .errors import CheckpointError, ConfigError, DimensionError, VariantMismatchError
from .metrics import eer
from .model import (
    ModelParams,
    TrainExample,
    VARIANTS,
    backward,
    init_params,
    predict_score,
    sgd_step,
)
from .modulation import MtbConfig
from .stackio import (
    DatasetManifest,
    ScoreRecord,
    ScoreSet,
    _atomic_write_text,
    read_stack,
)

# an epoch counts as improved only when EER drops by more than this
IMPROVEMENT_TOL = 1e-6

IMPROVEMENT_REFS = ("best", "prev")

CHECKPOINT_FORMAT = "moddyn-checkpoint"
CHECKPOINT_VERSION = 1

_LABEL_NAMES = {1: "bonafide", 0: "spoof"}
_LABEL_INTS = {"bonafide": 1, "spoof": 0}


@dataclass
class TrainConfig:
    max_epochs: int = 20
    lr_start: float = 1e-4
    lr_end: float = 1e-5
    patience: int = 3
    w_genuine: float = 10.0
    dropout_p: float = 0.25
    seed: int = 0
    shuffle: bool = True
    hidden: int = 128
    # whether "did not improve" compares against the running best EER or the
    # previous epoch's EER
    improvement_ref: str = "best"

    def validate(self) -> None:
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not self.lr_start >= self.lr_end > 0:
            raise ConfigError(
                f"need lr_start >= lr_end > 0, got {self.lr_start}, {self.lr_end}"
            )
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if not self.w_genuine > 0:
            raise ConfigError(f"w_genuine must be positive, got {self.w_genuine}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.hidden < 1:
            raise ConfigError(f"hidden must be >= 1, got {self.hidden}")
        if self.improvement_ref not in IMPROVEMENT_REFS:
            raise ConfigError(
                f"improvement_ref must be one of {IMPROVEMENT_REFS}, got {self.improvement_ref!r}"
            )


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    valid_eer: float
    lr: float
    steps: int


@dataclass
class TrainLog:
    records: list[EpochRecord] = field(default_factory=list)
    stopping_reason: str = ""
    best_epoch: int = -1
    best_valid_eer: float = float("inf")


@dataclass
class TrainResult:
    params: ModelParams
    log: TrainLog


def lr_at_epoch(epoch: int, cfg: TrainConfig) -> float:
    """Linear line from lr_start at epoch 0 to lr_end at the last epoch."""
    if cfg.max_epochs == 1:
        return cfg.lr_start
    frac = epoch / (cfg.max_epochs - 1)
    return cfg.lr_start + (cfg.lr_end - cfg.lr_start) * frac


def _check_examples(name: str, examples: list[TrainExample]) -> None:
    if not examples:
        raise ConfigError(f"{name} split is empty")
    labels = {ex.label for ex in examples}
    if labels != {0, 1}:
        raise ConfigError(f"{name} split must contain both classes, has labels {sorted(labels)}")


def _valid_eer(params: ModelParams, examples: list[TrainExample], cfg: MtbConfig) -> float:
    items = [
        ScoreRecord(
            id=f"v{i:05d}",
            score=predict_score(params, ex.stack, cfg),
            label=_LABEL_NAMES[ex.label],
        )
        for i, ex in enumerate(examples)
    ]
    return eer(ScoreSet(items=items)).value


def train(
    train_examples: list[TrainExample],
    valid_examples: list[TrainExample],
    variant: str,
    mtb_cfg: MtbConfig,
    cfg: TrainConfig,
    init: ModelParams | None = None,
    log_stream: TextIO | None = None,
) -> TrainResult:
    """Run the full recipe and return the best-valid-EER parameters.

    `init` overrides the seeded initialization (the rng then drives only
    shuffles and dropout). Each epoch streams `epoch,loss,valid_eer,lr` to
    log_stream when given.
    """
    cfg.validate()
    mtb_cfg.validate()
    _check_examples("train", train_examples)
    _check_examples("valid", valid_examples)

    first = train_examples[0].stack
    for ex in train_examples + valid_examples:
        if ex.stack.layers != first.layers or ex.stack.features != first.features:
            raise DimensionError(
                "all stacks must share layer and feature counts; "
                f"got ({ex.stack.layers}, {ex.stack.features}) "
                f"vs ({first.layers}, {first.features})"
            )

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if init is not None:
        if init.variant != variant:
            raise VariantMismatchError(
                f"initial parameters are for variant {init.variant!r}, training {variant!r}"
            )
        params = init.copy()
    else:
        params = init_params(variant, first.layers, first.features, cfg.hidden, rng)

    log = TrainLog()
    best_params = params.copy()
    prev_eer = float("inf")
    bad_streak = 0

    for epoch in range(cfg.max_epochs):
        lr = lr_at_epoch(epoch, cfg)
        order = rng.permutation(len(train_examples)) if cfg.shuffle else np.arange(
            len(train_examples)
        )
        total_loss = 0.0
        for idx in order:
            ex = train_examples[idx]
            mask = (rng.random(params.hidden) >= cfg.dropout_p).astype(np.float64)
            value, grads = backward(
                params,
                ex.stack,
                mtb_cfg,
                ex.label,
                dropout_mask=mask,
                dropout_p=cfg.dropout_p,
                w_genuine=cfg.w_genuine,
            )
            sgd_step(params, grads, lr)
            total_loss += value
        mean_loss = total_loss / len(train_examples)

        valid_eer = _valid_eer(params, valid_examples, mtb_cfg)
        log.records.append(
            EpochRecord(
                epoch=epoch,
                loss=mean_loss,
                valid_eer=valid_eer,
                lr=lr,
                steps=len(train_examples),
            )
        )
        if log_stream is not None:
            log_stream.write(f"{epoch},{mean_loss:.6f},{valid_eer:.6f},{lr:.8g}\n")

        # judge improvement against the reference as it stood before this epoch
        reference = log.best_valid_eer if cfg.improvement_ref == "best" else prev_eer
        improved = (reference - valid_eer) > IMPROVEMENT_TOL
        prev_eer = valid_eer

        if valid_eer < log.best_valid_eer:
            log.best_valid_eer = valid_eer
            log.best_epoch = epoch
            best_params = params.copy()

        if improved:
            bad_streak = 0
        else:
            bad_streak += 1
            if bad_streak >= cfg.patience:
                log.stopping_reason = "patience"
                break
    if not log.stopping_reason:
        log.stopping_reason = "max_epochs"
    return TrainResult(params=best_params, log=log)


def load_examples(manifest: DatasetManifest, split: str) -> list[TrainExample]:
    """Read the stacks of one split into memory, labels mapped to {0, 1}."""
    return [
        TrainExample(stack=read_stack(manifest.stack_path(e)), label=_LABEL_INTS[e.label])
        for e in manifest.split_entries(split)
    ]


def evaluate(
    params: ModelParams,
    manifest: DatasetManifest,
    split: str,
    mtb_cfg: MtbConfig,
) -> ScoreSet:
    """Score every utterance of a split in manifest order."""
    items = [
        ScoreRecord(
            id=e.id,
            score=predict_score(params, read_stack(manifest.stack_path(e)), mtb_cfg),
            label=e.label,
        )
        for e in manifest.split_entries(split)
    ]
    return ScoreSet(items=items)


def save_checkpoint(
    path: str | Path,
    params: ModelParams,
    log: TrainLog,
    mtb_cfg: MtbConfig,
) -> None:
    """Serialize parameters and run log as JSON with full float precision."""
    params.validate()
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "variant": params.variant,
        "dims": {
            "layers": params.layers,
            "features": params.features,
            "hidden": params.hidden,
        },
        "mtb": asdict(mtb_cfg),
        "params": {
            "layer_weights": params.layer_weights.tolist(),
            "w1": params.w1.tolist(),
            "b1": params.b1.tolist(),
            "w2": params.w2.tolist(),
            "b2": float(params.b2),
        },
        "log": {
            "stopping_reason": log.stopping_reason,
            "best_epoch": log.best_epoch,
            "best_valid_eer": log.best_valid_eer,
            "records": [asdict(r) for r in log.records],
        },
    }
    _atomic_write_text(Path(path), json.dumps(payload, indent=2) + "\n")


@dataclass
class Checkpoint:
    params: ModelParams
    log: TrainLog
    mtb_cfg: MtbConfig


def load_checkpoint(path: str | Path, expect_variant: str | None = None) -> Checkpoint:
    """Parse and validate a checkpoint; optionally pin the expected variant."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: not a parseable checkpoint: {exc}") from exc
    try:
        if payload["format"] != CHECKPOINT_FORMAT:
            raise CheckpointError(f"{path}: unexpected format tag {payload['format']!r}")
        if payload["version"] != CHECKPOINT_VERSION:
            raise CheckpointError(f"{path}: unsupported version {payload['version']!r}")
        variant = payload["variant"]
        if variant not in VARIANTS:
            raise CheckpointError(f"{path}: unknown variant {variant!r}")
        dims = payload["dims"]
        raw = payload["params"]
        params = ModelParams(
            variant=variant,
            layer_weights=np.asarray(raw["layer_weights"], dtype=np.float64),
            w1=np.asarray(raw["w1"], dtype=np.float64),
            b1=np.asarray(raw["b1"], dtype=np.float64),
            w2=np.asarray(raw["w2"], dtype=np.float64),
            b2=float(raw["b2"]),
        )
        expected = (
            params.layer_weights.shape,
            params.w1.shape,
            params.b1.shape,
            params.w2.shape,
        )
        declared = (
            (dims["layers"],),
            (dims["hidden"], dims["features"]),
            (dims["hidden"],),
            (dims["hidden"],),
        )
        if expected != declared:
            raise CheckpointError(
                f"{path}: parameter shapes {expected} disagree with dims {declared}"
            )
        params.validate()
        log_raw = payload["log"]
        log = TrainLog(
            records=[EpochRecord(**r) for r in log_raw["records"]],
            stopping_reason=log_raw["stopping_reason"],
            best_epoch=log_raw["best_epoch"],
            best_valid_eer=log_raw["best_valid_eer"],
        )
        mtb_cfg = MtbConfig(**payload["mtb"])
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"{path}: malformed checkpoint: {exc}") from exc
    if expect_variant is not None and variant != expect_variant:
        raise VariantMismatchError(
            f"{path}: checkpoint holds variant {variant!r}, expected {expect_variant!r}"
        )
    return Checkpoint(params=params, log=log, mtb_cfg=mtb_cfg)
