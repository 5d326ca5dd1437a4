"""Exception types shared across the package.

The CLI maps these onto exit codes, so keep the hierarchy flat.
"""


class SchreierKitError(Exception):
    """Base class for all package errors."""


class DomainError(SchreierKitError, ValueError):
    """An operation was called outside its precondition."""


class WindowExceededError(SchreierKitError):
    """A query on a lazy family reached beyond its truncation window."""

    def __init__(self, message, *, window=None, offending=None):
        super().__init__(message)
        self.window = window
        self.offending = offending


class NumericError(SchreierKitError):
    """A numerical routine failed to converge or to bracket its target.

    ``bounds`` carries the best lower/upper values found, when meaningful.
    """

    def __init__(self, message, *, bounds=None):
        super().__init__(message)
        self.bounds = bounds


class IncompatiblePermutationError(SchreierKitError):
    """A permutation does not preserve the family; ``witness`` is ``(F, pi(F))``."""

    def __init__(self, message, *, witness):
        super().__init__(message)
        self.witness = witness
