"""Semantic exception hierarchy shared across the package."""


class AhpiError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(AhpiError, ValueError):
    """An argument violates a documented precondition."""


class UnknownReferenceError(AhpiError, LookupError):
    """A record references an entity or interaction type that does not exist."""


class NumericalFailureError(AhpiError, RuntimeError):
    """A numerical routine failed to produce a usable result.

    Carries a ``diagnostics`` dict for post-mortem inspection.
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)

    def __str__(self) -> str:
        base = super().__str__()
        if self.diagnostics:
            details = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
            return f"{base} ({details})"
        return base


class InfeasibleTargetError(AhpiError, ValueError):
    """The requested network density cannot be reached by trimming."""


class UndefinedResultError(AhpiError, ValueError):
    """The requested statistic is undefined for the given input."""


class FileFormatError(AhpiError, ValueError):
    """An input file violates its documented format."""

    def __init__(self, message: str, path=None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}: "
        if line is not None:
            loc = f"{loc}line {line}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class MalformedHeaderError(FileFormatError):
    """The file header does not match the expected schema."""


class EmptyOutputError(FileFormatError):
    """Parsing succeeded but produced no usable rows."""


class ConfigError(AhpiError, ValueError):
    """A run configuration is invalid or carries unknown keys."""
