"""Exception hierarchy shared across the package."""


class BnshiftError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BnshiftError):
    """Invalid data values (non-finite statistics, negative variances, ...)."""


class SchemaError(ValidationError):
    """Layer schema mismatch: unknown layer, changed channel count, bad order."""


class ConfigError(BnshiftError):
    """Invalid configuration (window size, threshold, influence, scenario)."""


class StreamFormatError(BnshiftError):
    """A stream/trace/events/truth file is malformed.

    Carries the offending path and 1-based line number when known.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:" if line is None else f"{path}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class HookError(BnshiftError):
    """A reset hook raised while handling a detection event.

    Engine state is fully updated before the hook runs, so catching this
    error and continuing the stream is safe. The triggering event is
    available as ``event``.
    """

    def __init__(self, event, cause: BaseException):
        self.event = event
        super().__init__(f"reset hook failed on event at t={event.t}: {cause!r}")
