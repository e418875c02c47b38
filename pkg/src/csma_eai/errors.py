"""Exception hierarchy for the csma_eai package."""


class CsmaError(Exception):
    """Base class for all errors raised by this package."""


class IndexOutOfRangeError(CsmaError):
    """A link or state index is outside the valid range."""


class SelfLoopError(CsmaError):
    """An edge connects a link to itself."""


class TooManyLinksError(CsmaError):
    """The graph exceeds the 64-link bit-set representation limit."""


class StateSpaceTooLargeError(CsmaError):
    """Independent-set enumeration exceeded the configured state cap.

    Instances this large need an approximate method, which this package
    deliberately does not provide.
    """


class LengthMismatchError(CsmaError):
    """Two per-link vectors have different lengths."""


class ComputationOverflowError(CsmaError, OverflowError):
    """A state weight or partition function left the double range."""


class NoConvergenceError(CsmaError):
    """The target-throughput solver exhausted its iteration budget."""


class InfeasibleTargetError(CsmaError):
    """A target throughput is unreachable at any finite access intensity."""


class IterationLimitExceededError(CsmaError):
    """The compute-and-compare outer loop hit its safety guard."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class InvalidConfigError(CsmaError):
    """A simulation or CLI configuration is inconsistent."""


class InvariantViolationError(CsmaError):
    """Two adjacent links transmitted simultaneously (simulator bug)."""


class TooManyEdgesError(CsmaError):
    """A requested random graph needs more edges than a simple graph allows."""
