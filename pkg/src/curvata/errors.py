"""Exception hierarchy shared by all curvata modules."""


class CurvataError(Exception):
    """Base class for every error raised by curvata."""


class InvalidInput(CurvataError, ValueError):
    """Arguments violate a documented precondition."""


class InsufficientInput(CurvataError, ValueError):
    """A decision branch needs data the caller did not supply."""


class NumericalFailure(CurvataError, ArithmeticError):
    """A numerical routine did not converge or failed a self-check.

    ``diagnostics`` carries whatever the failing routine could report
    (residual norms, iteration counts, offending parameters).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
