"""Exception types shared across the package."""


class SsclustError(Exception):
    """Base class for all package errors."""


class ConfigError(SsclustError):
    """Invalid or inconsistent run configuration."""


class InputError(SsclustError):
    """Invalid input data or parameters."""


class FormatError(InputError):
    """Malformed file content (e.g. a broken PGM payload)."""


class DivergenceError(SsclustError):
    """Solver produced non-finite values."""
