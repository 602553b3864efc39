"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration, bounds, or input files (CLI exit code 2)."""


class EvaluationError(RuntimeError):
    """A candidate evaluation failed unexpectedly (CLI exit code 3)."""


class InsufficientDataError(ValueError):
    """Not enough observations for the requested analysis (CLI exit code 4)."""
