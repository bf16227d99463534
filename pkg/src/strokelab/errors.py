"""Exception types shared across the pipeline; the CLI maps them to exit codes."""


class ConfigError(ValueError):
    """Invalid experiment configuration or classifier spec."""


class DataError(ValueError):
    """Input data violates a precondition (schema, missing values, class counts)."""


class TrainingError(RuntimeError):
    """Optimization diverged or produced non-finite values."""
