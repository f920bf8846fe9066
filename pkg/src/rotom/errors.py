"""Exception hierarchy shared by every rotom module."""


class RotomError(Exception):
    """Base class for all errors raised by rotom."""


class SchemaError(RotomError, ValueError):
    """A robot description could not be parsed or failed validation."""


class DimensionMismatch(RotomError, ValueError):
    pass


class JointLimitViolation(RotomError, ValueError):
    pass


class ZeroForce(RotomError, ValueError):
    """The force (or direction) vector has zero norm, so the ratio is undefined."""


class SingularMassMatrix(RotomError, ArithmeticError):
    """The joint-space mass matrix is not safely invertible at this configuration."""


class DegenerateEllipsoid(RotomError, ArithmeticError):
    """Largest mobility eigenvalue is below the degeneracy threshold."""


class NormSingularity(RotomError, ArithmeticError):
    """The objective norm is (numerically) zero, where it is not differentiable."""
