"""Exception types raised by the numerical engine."""


class FracFormsError(Exception):
    """Base class for computation errors (CLI exit status 1)."""


class DomainError(FracFormsError, ValueError):
    pass


class NonFiniteIntegrand(FracFormsError):
    pass


class StepUnderflow(FracFormsError):
    pass


class SchemeDisagreement(FracFormsError):
    pass


class UnsupportedOrder(FracFormsError):
    pass


class PoleError(FracFormsError):
    pass


class NonPolynomialWeight(FracFormsError):
    pass


class ParseError(FracFormsError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


# matrix orders
class ZeroMatrix(FracFormsError):
    pass


class UndefinedAtEigenvalue(FracFormsError):
    pass


class IllConditioned(FracFormsError):
    pass


class NotNormal(FracFormsError):
    pass


class NonDiagonalizableOrder(FracFormsError):
    pass


class NotPositiveDefinite(FracFormsError):
    pass


# forms
class AmbientMismatch(FracFormsError):
    pass


class SignatureMismatch(FracFormsError):
    pass


class BlockTooLarge(FracFormsError):
    pass


# coordinates / covariant derivative
class SingularSystem(FracFormsError):
    pass


class SeriesNoConverge(FracFormsError):
    pass
