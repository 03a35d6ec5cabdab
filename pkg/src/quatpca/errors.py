"""Exception types shared across the package."""


class QuatPcaError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(QuatPcaError):
    """Operands have incompatible dimensions."""


class InvalidParameter(QuatPcaError):
    """A parameter lies outside its legal range."""


class DegenerateDirection(QuatPcaError):
    """No usable direction remains (zero ascent vector or exhausted subspace)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidWeight(QuatPcaError):
    """A weighting value cannot be built or inverted."""


class InvalidDataset(QuatPcaError):
    """The sample collection violates a structural requirement."""


class IoError(QuatPcaError):
    """A file could not be read or written."""


class FormatError(QuatPcaError):
    """A serialized artifact is malformed."""


class ConfigError(QuatPcaError):
    """One or more configuration entries are invalid."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
