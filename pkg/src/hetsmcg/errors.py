"""Exceptions raised by the hetsmcg package."""


class HetSMCGError(Exception):
    """Base class for all errors raised by hetsmcg."""


class DimensionError(HetSMCGError, ValueError):
    """Raised when tensor or feature shapes do not fit together."""


class ContractError(HetSMCGError):
    """Raised when a precondition of an operation is violated.

    E.g. calling backward on a non-scalar loss or making a graph undirected twice.
    """


class InputError(HetSMCGError):
    """Raised when input files or directories are missing or unreadable."""


class EmbeddingMissError(InputError):
    """Raised when a precomputed embedding lookup has no entry for a text."""


class ConfigurationError(HetSMCGError, ValueError):
    """Raised when a setting or configuration value is invalid."""


class NumericalError(HetSMCGError):
    """Raised when a computation produces NaN or Inf values.

    Args:
        message (str): The error message.
        diagnostic (dict, optional): Additional information about the failure.
    """

    def __init__(self, message: str, diagnostic: dict = None) -> None:
        """Initializes the numerical error."""
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class RecordError(HetSMCGError, ValueError):
    """Raised when a single corpus record is malformed. The corpus loader skips such records."""
