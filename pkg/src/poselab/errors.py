"""Exception hierarchy shared across the package."""


class PoselabError(Exception):
    """Base class for all package-specific errors."""


class ContractError(PoselabError):
    """An argument violates an operation's shape or type contract."""


class DomainError(PoselabError):
    """A value is outside the mathematically valid domain."""


class ConfigError(PoselabError):
    """A configuration is invalid or inconsistent."""


class PrerequisiteError(PoselabError):
    """A pipeline stage was requested before the stages it depends on."""


class FigureOutOfFrame(PoselabError):
    """Retry signal: the projected figure leaves the image margin.

    Raised by the renderer; dataset generation catches it and resamples
    the offending sequence.
    """


class CheckpointError(PoselabError):
    """A model checkpoint could not be read."""


class CorruptCheckpointError(CheckpointError):
    """The checkpoint file is truncated or malformed."""


class CheckpointVersionError(CheckpointError):
    """The checkpoint was written with an incompatible format version."""
