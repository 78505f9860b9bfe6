"""Exception types shared across the package."""

from __future__ import annotations

__all__ = ["TickStringError", "ValidationError", "NumericContractError"]


class TickStringError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TickStringError, ValueError):
    """Input data or configuration violates a documented contract."""


class NumericContractError(TickStringError, ArithmeticError):
    """A computation's numeric preconditions cannot be met.

    Raised for zero-variance samples, singular linear systems, undefined
    ratios and similar conditions that make the requested quantity
    mathematically meaningless for the given input.
    """
