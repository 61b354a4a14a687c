"""Exception taxonomy shared by all engine modules."""


class StreamTTSError(Exception):
    """Base class for all engine errors."""


class ConfigError(StreamTTSError):
    """Inconsistent architecture config or mismatched tensor shapes (fatal)."""


class InputError(StreamTTSError):
    """Caller-supplied data is invalid (empty input, id out of vocabulary, ...)."""


class NumericError(StreamTTSError):
    """A kernel produced a non-finite value."""


class ModelFormatError(StreamTTSError):
    """Model container file is missing, corrupt, or inconsistent."""


class LogicError(StreamTTSError):
    """Internal contract violated; indicates a bug, not bad input."""
