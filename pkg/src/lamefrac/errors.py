"""Exception hierarchy shared by all modules."""


class LameFracError(Exception):
    """Base class for every error raised by this package."""


class EllipticityViolation(LameFracError, ValueError):
    pass


class InvalidExponent(LameFracError, ValueError):
    pass


class DegenerateFrequency(LameFracError, ValueError):
    pass


class DomainError(LameFracError, ValueError):
    pass


class OrderError(LameFracError, ValueError):
    pass


class QuadratureFailure(LameFracError, RuntimeError):
    pass


class ShapeMismatch(LameFracError, ValueError):
    pass


class DegenerateInput(LameFracError, ValueError):
    pass


class PreconditionViolation(LameFracError, ValueError):
    pass


class ParseError(LameFracError, ValueError):
    pass


class ValidationError(LameFracError, ValueError):
    pass
