"""Exception hierarchy.

Input problems derive from :class:`ValidationError` so the CLI can map them to
exit status 2 in one place.
"""


class SigmaLaxError(Exception):
    pass


class ValidationError(SigmaLaxError):
    """Input violates a structural invariant."""


class ParseError(ValidationError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class _IndexedViolation(ValidationError):
    what = "violation"

    def __init__(self, index: tuple, detail: str = ""):
        self.index = tuple(index)
        msg = f"{self.what} at {self.index}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class AntisymmetryViolation(_IndexedViolation):
    what = "antisymmetry violated"


class JacobiViolation(_IndexedViolation):
    what = "Jacobi identity violated"


class GradingNotClosed(_IndexedViolation):
    what = "grading not closed"


class DimensionMismatch(ValidationError):
    pass


class GradeOutOfRange(ValidationError):
    pass


class DegenerateForm(ValidationError):
    pass


class SymmetryClassViolation(ValidationError):
    pass


class NotGradingDiagonal(ValidationError):
    pass


class UnknownModel(ValidationError):
    pass


class BadParameters(ValidationError):
    pass


class NoClosedForm(SigmaLaxError):
    pass


class NotExact(SigmaLaxError):
    pass


class UnresolvedKernelComponent(SigmaLaxError):
    """A cokernel component of the equations is not covered by any constraint."""


class NonIntegerSpectrum(UserWarning):
    pass


class SeriesTruncationWarning(UserWarning):
    pass
