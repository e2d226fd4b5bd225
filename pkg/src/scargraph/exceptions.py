"""Exception types shared across the package."""


class ScarGraphError(Exception):
    """Base class for all package errors."""


class InvalidArgument(ScarGraphError, ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedModel(ScarGraphError, ValueError):
    """The requested operation is not defined for this constraint family."""


class ResourceLimit(ScarGraphError, RuntimeError):
    """A dimension or memory cap would be exceeded."""


class ContractViolation(ScarGraphError, AssertionError):
    """An internal consistency check failed (a construction bug, not bad input)."""
