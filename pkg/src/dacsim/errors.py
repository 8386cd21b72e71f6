"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DacsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DacsimError):
    """An experiment configuration failed validation."""


class TooFewAgentsError(DacsimError):
    """Graphs need at least three agents."""


class MalformedEdgeError(DacsimError):
    """Edge list contains a self-loop, bad arity, or out-of-range index."""


class DisconnectedGraphError(DacsimError):
    """The communication graph is not connected."""


class IndexOutOfRangeError(DacsimError):
    """Agent index outside [1, n]."""


class NonPositiveRangeError(DacsimError):
    """The half-width of the random-draw interval must be positive."""


class SparsityViolationError(DacsimError):
    """An exchange matrix has a nonzero entry off the graph's edges."""


class LengthMismatchError(DacsimError):
    """Vector length does not match the number of agents."""


class StabilityGuardError(DacsimError):
    """Requested step size violates the RK4 stability guard."""


class NonFiniteStateError(DacsimError):
    """Integration diverged (non-finite or absurdly large state)."""


class InsufficientTransientError(DacsimError):
    """Too few transient samples above the oscillation floor to fit a rate."""


class NonUniformSamplingError(DacsimError):
    """Transcript samples are not uniformly spaced."""


class TargetInCoalitionError(DacsimError):
    """The attack target must not be a member of the coalition."""


class NotZeroSumError(DacsimError):
    """Shift vector must sum to zero."""


class NotAnEdgeError(DacsimError):
    """Requested agent pair is not an edge of the graph."""


class NeighborInCoalitionError(DacsimError):
    """The designated legitimate neighbor belongs to the coalition."""


class NonPositiveCouplingError(DacsimError):
    """Substate coupling weight must be positive."""
