"""Exception hierarchy shared by every module."""


class OFBMError(Exception):
    """Base class for all library errors."""


class ShapeError(OFBMError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class DomainError(OFBMError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NumericError(OFBMError, ArithmeticError):
    """A computation overflowed or lost all accuracy."""


class ValidationError(OFBMError, ValueError):
    """Spectral parameters fail a required condition."""


class CapacityError(OFBMError, ValueError):
    """The request would enumerate too many objects."""
