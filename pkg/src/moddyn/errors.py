"""Exception hierarchy shared across the package.

Every error raised on bad data or bad configuration derives from
``ModdynError`` so the CLI can map failures onto its exit codes.
"""


class ModdynError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ModdynError):
    """An object violates one of its declared invariants."""


class FormatError(ModdynError):
    """A binary file does not look like the expected format."""


class CorruptionError(FormatError):
    """A binary file has the right magic but inconsistent header/payload."""


class ParseError(ModdynError):
    """A text table could not be parsed; message carries the line number."""


class DimensionError(ModdynError):
    """Array shapes do not line up."""


class ConfigError(ModdynError):
    """A configuration value or dataset precondition is unusable."""


class MetricDomainError(ModdynError):
    """A metric was asked for on a score set outside its domain."""


class CheckpointError(ModdynError):
    """A checkpoint file is unreadable or malformed."""


class VariantMismatchError(CheckpointError):
    """A checkpoint was loaded for a different model variant than requested."""
