class DewError(Exception):
    """Base class for all errors raised by dewsim."""


class ConfigError(DewError, ValueError):
    pass


class TraceParseError(DewError, ValueError):
    def __init__(self, lineno: int, text: str, reason: str):
        self.lineno = lineno
        self.text = text
        super().__init__(f"line {lineno}: {reason}: {text!r}")


class AddressRangeError(TraceParseError):
    pass


class ResourceError(DewError, MemoryError):
    pass


class UsageError(DewError, ValueError):
    pass


class ShadowCheckError(DewError, AssertionError):
    """Raised when shadow checking finds the fast path disagreeing with a full search."""
