"""Exception hierarchy shared by all modules."""


class RetroSmoothError(Exception):
    pass


class DimensionError(RetroSmoothError, ValueError):
    pass


class DomainError(RetroSmoothError, ValueError):
    pass


class InvariantError(RetroSmoothError, ValueError):
    """A state or measurement violates one of its structural invariants."""


class PreconditionError(RetroSmoothError, ValueError):
    pass


class NumericError(RetroSmoothError, ArithmeticError):
    pass


class QuadratureError(NumericError):
    """Adaptive quadrature hit its subdivision limit.

    ``estimate`` and ``error_estimate`` hold the best values reached.
    """

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate
