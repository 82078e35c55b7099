class DyadicError(ValueError):
    """Base class for domain violations raised by the dyadic toolkit."""


class GridError(DyadicError):
    """Raised for invalid grids, levels, rectangles or mismatched grid functions."""


class StorageError(GridError):
    """Raised for malformed binary payloads or CSV grid functions."""


class WeightError(DyadicError):
    """Raised when a function that should be a weight is not strictly positive."""


class AdmissibilityError(DyadicError):
    """Raised when an operator coefficient violates its size or BMO bound."""


class IdentityError(AssertionError):
    """
    Raised when an exact identity or a frozen fixture check fails.

    :param message: Human readable description of the failure.
    :param artifact: Optional path of the replay artifact written for the failure.
    """

    def __init__(self, message: str, artifact: str = None):
        super().__init__(message)
        self.artifact = artifact
