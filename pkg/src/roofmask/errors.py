"""Exception types shared across the package."""


class RoofmaskError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(RoofmaskError, ValueError):
    """An argument violates a documented precondition or invariant."""


class DegenerateBoxError(InvalidArgumentError):
    """A box with zero area was passed where positive area is required."""


class DegenerateRoiError(InvalidArgumentError):
    """An RoI collapses to (near-)zero area in feature-cell coordinates."""


class CorruptDataError(RoofmaskError, ValueError):
    """Serialized data failed structural validation while being read."""
