"""Exception hierarchy shared by the library and the CLI."""


class PrescurvError(Exception):
    """Base class for all errors raised by prescurv."""


class DomainError(PrescurvError, ValueError):
    """A time value (or a finite-difference stencil) left the ambient slab."""


class UnsupportedConfiguration(PrescurvError, ValueError):
    """The requested operation is not defined for this ambient configuration."""


class ConeViolation(PrescurvError, ValueError):
    """A curvature function was evaluated outside the open positive cone."""


class ConfigError(PrescurvError, ValueError):
    """Run configuration failed schema or range validation."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FlowAbort(PrescurvError, RuntimeError):
    """A flow guard fired.

    ``node`` is the grid index of the offending node and ``snapshot`` the
    last accepted state (a ``GraphState``), when available.
    """

    cause = "aborted"

    def __init__(self, message, node=None, snapshot=None):
        super().__init__(message)
        self.node = node
        self.snapshot = snapshot


class SpacelikeLost(FlowAbort):
    cause = "spacelike_lost"


class ConvexityLost(FlowAbort):
    cause = "convexity_lost"


class LeftBarriers(FlowAbort):
    cause = "left_barriers"
