"""
Exception Hierarchy.

Every failure raised on purpose by the toolkit derives from `AutoGenError`, so the
command-line front end can report it with a single `except` clause. The concrete
classes also inherit from the matching builtin (ValueError / RuntimeError) so callers
that only know the builtins still catch them.
"""


class AutoGenError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(AutoGenError, ValueError):
    """Raised when matrix or dataset dimensions do not line up."""


class ParameterError(AutoGenError, ValueError):
    """Raised when a hyperparameter or argument is outside its valid range."""


class DatasetError(AutoGenError, ValueError):
    """Raised for malformed manifests, images, or dataset files."""


class ConfigError(AutoGenError, ValueError):
    """Raised for unknown, duplicated, or invalid configuration keys."""


class ModelFormatError(AutoGenError, ValueError):
    """Raised when a model container cannot be decoded."""


class DivergenceError(AutoGenError, RuntimeError):
    """
    Raised when training produces a non-finite or runaway loss.

    Attributes:
        iteration (int): Zero-based iteration at which the loss went bad.
        value (float): The offending loss value.
    """

    def __init__(self, message: str, iteration: int, value: float):
        super().__init__(message)
        self.iteration = iteration
        self.value = value
