"""Exception hierarchy for hybridfv."""


class HybridFVError(Exception):
    """Base class for all package errors."""


class MeshError(HybridFVError, ValueError):
    """Invalid mesh input, file or construction."""


class ConfigError(HybridFVError, ValueError):
    """Invalid run configuration.

    Attributes:
        key: Dotted path of the offending key (e.g. ``time.N``)

    """

    def __init__(self, key: str, message: str) -> None:
        """Initialize with the offending key path and a description."""
        super().__init__(f"{key}: {message}")
        self.key = key


class ExpressionError(HybridFVError, ValueError):
    """Syntax, identifier, arity or domain error in a coefficient expression.

    Attributes:
        position: Character offset of a parse error, or None for evaluation errors

    """

    def __init__(self, message: str, position: int | None = None) -> None:
        """Initialize with a message and optional source position."""
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class SolverError(HybridFVError, RuntimeError):
    """Failure of a linear or nonlinear solve."""


class RunAborted(SolverError):
    """Time loop aborted; ``result`` holds every accepted step."""

    def __init__(self, message: str, result: object) -> None:
        """Initialize with the failure message and the partial run result."""
        super().__init__(message)
        self.result = result
