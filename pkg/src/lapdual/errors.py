"""Exception types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """A mechanism, symbol, process or config violates its invariants."""


class NumericAccuracyError(ArithmeticError):
    """A quadrature or series failed its self-consistency check."""


class StiffnessError(ArithmeticError):
    """The adaptive integrator's step size underflowed."""


class ContractError(ValueError):
    """Two objects were combined in a way the API does not support."""
