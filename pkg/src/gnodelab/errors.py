"""Exception types shared across gnodelab.

Every error raised on a contract violation is a subclass of ValueError or
RuntimeError so callers can stay coarse-grained, but the CLI maps them onto
distinct exit codes (config 2, divergence 3, I/O 4).
"""


class DimensionError(ValueError):
    """Shapes or sizes violate an operation's preconditions."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its budget without converging."""


class DivergenceError(RuntimeError):
    """A state trajectory left the representable range (NaN/Inf)."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class InsufficientDataError(ValueError):
    """Too few observations for the requested fit."""


class SingularReadoutError(RuntimeError):
    """Readout map cannot be inverted for output-space projection."""


class ConfigError(ValueError):
    """Configuration file is malformed or violates the schema."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
