"""Exception hierarchy shared by all entbound modules."""


class EntboundError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(EntboundError, ValueError):
    """An argument is malformed or inconsistent with the other arguments."""


class CapacityError(EntboundError):
    """A dense computation was requested above the configured qubit cap."""


class StateValidityError(EntboundError, ValueError):
    """A state object violates its physicality constraints."""


class UnsupportedDistanceError(EntboundError):
    """The requested distance has no exact formula for this input class."""


class AlreadySeparableError(EntboundError):
    """A closest-separable-state construction was asked for a separable input."""


class SchemaError(EntboundError, ValueError):
    """An input file does not match the documented schema."""
