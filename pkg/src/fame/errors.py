"""Exception hierarchy shared across the package."""


class FameError(Exception):
    """Base class for all errors raised by this package."""


class ClipFormatError(FameError):
    """Malformed container or image header."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ClipLengthError(ClipFormatError):
    """Payload shorter or longer than the header promises."""

    def __init__(self, expected, got, path=None):
        where = f"{path}: " if path else ""
        super().__init__(f"{where}payload length mismatch: expected {expected} bytes, got {got}")
        self.expected = expected
        self.got = got


class ClipRangeError(FameError, ValueError):
    """Pixel value outside [0, 1]."""


class ShapeError(FameError, ValueError):
    """Two inputs disagree on a dimension."""


class PreconditionError(FameError, ValueError):
    """An operation was called outside its domain."""


class TrainingError(FameError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, step, loss):
        super().__init__(f"training diverged at step {step}: loss={loss}")
        self.step = step
        self.loss = loss
