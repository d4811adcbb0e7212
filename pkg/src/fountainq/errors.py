from __future__ import annotations


class ParameterError(ValueError):
    """A numeric parameter lies outside the domain an operation accepts."""


class ContractError(ValueError):
    """Arguments are individually valid but inconsistent with each other."""


class TransitionOutOfRange(ValueError):
    """The error-probability curve never crosses the requested level on the grid."""
