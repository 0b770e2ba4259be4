"""Bridge from wav audio to REPSTK1 layer stacks via a speech encoder."""

from .audio import ENCODER_RATE, load_wave
from .errors import (
    AudioFormatError,
    EncoderUnavailableError,
    ExportError,
    SampleRateError,
)
from .export import (
    ENCODER_NAMES,
    FRAME_RATE,
    ExportJob,
    encode_stack,
    expected_frames,
    export_stack,
    load_encoder,
)
from .repstk import write_repstk

__version__ = "0.1.0"

__all__ = [
    "ENCODER_NAMES",
    "ENCODER_RATE",
    "FRAME_RATE",
    "AudioFormatError",
    "EncoderUnavailableError",
    "ExportError",
    "ExportJob",
    "SampleRateError",
    "encode_stack",
    "expected_frames",
    "export_stack",
    "load_encoder",
    "load_wave",
    "write_repstk",
]
