class ExportError(Exception):
    """Base for everything this package raises on purpose."""


class AudioFormatError(ExportError):
    """Audio file unusable: wrong channel count, too short, undecodable."""


class SampleRateError(ExportError):
    """Sample rate differs from the encoder's 16 kHz and resampling is off."""


class EncoderUnavailableError(ExportError):
    """Named encoder weights cannot be loaded in this environment."""
