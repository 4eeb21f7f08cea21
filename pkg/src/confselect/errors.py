"""Exception types shared across the package."""

from __future__ import annotations


class ConfselectError(ValueError):
    """Base class for all errors raised by this package."""


class IngestionError(ConfselectError):
    """Raised when input data fails validation (non-finite values, bad rows)."""


class ContractError(ConfselectError):
    """Raised when an argument violates an operation's contract."""
