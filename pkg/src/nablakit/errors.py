"""Exception taxonomy shared by all nablakit modules."""


class NablaKitError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(NablaKitError):
    """An operation was called with inputs that break its preconditions."""


class CapabilityError(NablaKitError):
    """A function spec does not expose a derivative of the requested order."""


class DomainError(NablaKitError):
    """An evaluation point or stencil leaves the declared domain."""


class EvaluationError(NablaKitError):
    """A function produced a non-finite value; carries the offending node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NumericalError(NablaKitError):
    """A computation failed for numerical reasons (degenerate denominator,
    nonpositive value inside a log/power, out-of-range mean)."""


class NotApplicableError(NumericalError):
    """A diagnostic's hypotheses do not hold for the given inputs, so the
    check is inapplicable rather than failed."""


class InputError(NablaKitError):
    """Malformed user-facing input (CLI flags, CSV files, JSON payloads)."""
