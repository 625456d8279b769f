"""Exception hierarchy shared by all modules."""


class ThirringError(Exception):
    """Base class for every error raised by this package."""


class EmptyPathError(ThirringError, ValueError):
    """A path needs at least two bits to define a transition."""


class DomainError(ThirringError, ValueError):
    """Boundary data outside the causal cone or otherwise unreachable."""


class ShapeError(ThirringError, ValueError):
    """Graded amplitudes with different total letter counts were combined."""


class ConfigurationError(ThirringError, ValueError):
    """A run configuration would violate a structural precondition."""


class ResourceCapError(ThirringError, RuntimeError):
    """An enumeration or oracle exceeded its hard size cap."""


class PauliError(ThirringError, ValueError):
    """Two particles were placed in the same (site, chirality) mode."""


class SingularParameterError(ThirringError, ValueError):
    """The requested construction divides by m or n and one of them is zero."""


class UnsupportedClassError(ThirringError, NotImplementedError):
    """Diagram class outside the set with known closed-form coefficients."""
