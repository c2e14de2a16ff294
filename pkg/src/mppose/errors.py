"""Exception hierarchy shared by all modules."""


class MPPoseError(Exception):
    """Base class for every error raised by this package."""


class FrameError(MPPoseError, ValueError):
    """Two transforms were chained across mismatched frames."""


class InvalidRotation(MPPoseError, ValueError):
    """A matrix expected to be in SO(3) is not."""


class DegenerateInput(MPPoseError, ValueError):
    """Input geometry does not define the requested object."""


class DegenerateConfiguration(DegenerateInput):
    """A minimal problem whose canonical frame (or its divisors) does not exist."""


class DegenerateSystem(DegenerateInput):
    """A polynomial system with no isolated solutions."""


class InvalidPolynomial(MPPoseError, ValueError):
    pass


class ShapeError(MPPoseError, ValueError):
    pass


class InvalidLine(MPPoseError, ValueError):
    pass


class GenerationError(MPPoseError, RuntimeError):
    """The scene generator could not place a valid feature."""


class InsufficientData(MPPoseError, ValueError):
    pass


class SchemaError(MPPoseError, ValueError):
    """An instance file does not match the documented JSON layout."""
