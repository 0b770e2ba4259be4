"""Modulation-dynamics pipeline for spoofed-speech detection.

Layer-stacked encoder representations go through a learnable layer collapse,
a per-channel modulation transform, and a small FC head; metrics, training
loop, synthetic data generation and the `moddyn` CLI live alongside.
"""

from .errors import (
    CheckpointError,
    ConfigError,
    CorruptionError,
    DimensionError,
    FormatError,
    MetricDomainError,
    ModdynError,
    ParseError,
    ValidationError,
    VariantMismatchError,
)
from .metrics import (
    EerEstimate,
    RocCurve,
    SignificanceResult,
    eer,
    f1_at_threshold,
    hter_significance,
    rates_at_threshold,
    roc_points,
)
from .model import (
    Gradients,
    ModelParams,
    TrainExample,
    backward,
    forward,
    init_params,
    loss,
    predict_score,
    sgd_step,
)
from .modulation import (
    ModulationRepresentation,
    MtbConfig,
    feature_mean_pattern,
    frame_signal,
    layer_collapse,
    mtb_transform,
    pool_modulation,
    pool_raw,
    read_modulation_text,
    stft_frames,
    write_modulation_text,
)
from .stackio import (
    DatasetManifest,
    ManifestEntry,
    RepresentationStack,
    ScoreRecord,
    ScoreSet,
    read_manifest,
    read_scores,
    read_stack,
    write_manifest,
    write_scores,
    write_stack,
)
from .synth import SynthSpec, gen_dataset, gen_stack
from .training import (
    Checkpoint,
    EpochRecord,
    TrainConfig,
    TrainLog,
    TrainResult,
    evaluate,
    load_checkpoint,
    load_examples,
    lr_at_epoch,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ConfigError",
    "CorruptionError",
    "DimensionError",
    "FormatError",
    "MetricDomainError",
    "ModdynError",
    "ParseError",
    "ValidationError",
    "VariantMismatchError",
    "EerEstimate",
    "RocCurve",
    "SignificanceResult",
    "eer",
    "f1_at_threshold",
    "hter_significance",
    "rates_at_threshold",
    "roc_points",
    "Gradients",
    "ModelParams",
    "TrainExample",
    "backward",
    "forward",
    "init_params",
    "loss",
    "predict_score",
    "sgd_step",
    "ModulationRepresentation",
    "MtbConfig",
    "feature_mean_pattern",
    "frame_signal",
    "layer_collapse",
    "mtb_transform",
    "pool_modulation",
    "pool_raw",
    "read_modulation_text",
    "stft_frames",
    "write_modulation_text",
    "DatasetManifest",
    "ManifestEntry",
    "RepresentationStack",
    "ScoreRecord",
    "ScoreSet",
    "read_manifest",
    "read_scores",
    "read_stack",
    "write_manifest",
    "write_scores",
    "write_stack",
    "SynthSpec",
    "gen_dataset",
    "gen_stack",
    "Checkpoint",
    "EpochRecord",
    "TrainConfig",
    "TrainLog",
    "TrainResult",
    "evaluate",
    "load_checkpoint",
    "load_examples",
    "lr_at_epoch",
    "save_checkpoint",
    "train",
    "__version__",
]
