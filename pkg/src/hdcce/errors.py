"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or option combination (CLI exit code 2)."""


class DataError(ValueError):
    """Malformed or non-finite input data (CLI exit code 3)."""


class NumericError(RuntimeError):
    """Internal numerical failure (CLI exit code 4)."""
