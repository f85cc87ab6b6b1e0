"""Exception hierarchy. Each class maps to one CLI exit code."""


class MultibordError(Exception):
    exit_code = 2


class InputError(MultibordError, ValueError):
    """Malformed fixture, mesh, or argument."""

    exit_code = 2


class DegreeError(MultibordError, ValueError):
    """Degree out of range, degree mismatch, or forbidden coefficient mode."""

    exit_code = 3


class GenericityError(MultibordError, RuntimeError):
    """A configuration is not in general position.

    ``detail`` carries the offending simplices so reports can name them.
    """

    exit_code = 4

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail or {}


class ResolutionError(GenericityError):
    """A grid or Newton solve could not resolve a zero set."""
