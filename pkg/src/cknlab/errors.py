"""Exception types raised across the package."""


class CKNError(Exception):
    """Base class for all package errors."""


class InvalidParams(CKNError, ValueError):
    """Raw parameters violate the admissibility conditions."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("inadmissible parameters: " + "; ".join(self.violations))


class DomainError(CKNError, ValueError):
    pass


class InvalidConstant(CKNError, ValueError):
    pass


class NumericalError(CKNError, ArithmeticError):
    """Base for failures of a numerical procedure (CLI exit code 3)."""


class QuadratureFailure(NumericalError):
    pass


class DivergentIntegral(NumericalError):
    pass


class DegenerateProfile(NumericalError):
    pass


class NoLimit(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass
