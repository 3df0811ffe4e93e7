"""Exception hierarchy shared by all gecmetric modules."""

from __future__ import annotations


class GecMetricError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GecMetricError):
    """A value violates a data-model invariant (bad span, size mismatch, ...)."""


class ParseError(GecMetricError):
    """An on-disk format could not be parsed.

    ``line`` carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DetectorError(GecMetricError):
    """An error detector failed (child process died, bad reply, timeout).

    The failing detector is always named so a silent empty result can never
    be mistaken for a clean sentence.
    """

    def __init__(self, detector: str, message: str):
        self.detector = detector
        super().__init__(f"detector {detector!r}: {message}")


class ModelError(GecMetricError):
    """A serialized model is unreadable or incompatible with this code."""
