"""
Exception hierarchy for isogeo.

Every domain failure derives from GeometryError and carries a short `code`
that the command line prints and maps to exit status 2.
"""


class GeometryError(ValueError):
    """Base class of all domain validation failures."""
    code = 'GeometryError'

    def __str__(self):
        message = super().__str__()
        return f"{self.code}: {message}" if message else self.code


class InvalidSpectrumError(GeometryError):
    code = 'InvalidSpectrum'


class NotDecreasingError(InvalidSpectrumError):
    code = 'NotDecreasing'


class NotPositiveError(InvalidSpectrumError):
    code = 'NotPositive'


class TraceNotOneError(InvalidSpectrumError):
    code = 'TraceNotOne'


class DimensionTooSmallError(InvalidSpectrumError):
    code = 'DimensionTooSmall'


class NotHermitianError(GeometryError):
    code = 'NotHermitian'


class NotPSDError(GeometryError):
    code = 'NotPSD'


class RankMismatchError(GeometryError):
    code = 'RankMismatch'


class SpectrumMismatchError(GeometryError):
    code = 'SpectrumMismatch'


class BaseMismatchError(GeometryError):
    code = 'BaseMismatch'


class ShapeMismatchError(GeometryError):
    code = 'ShapeMismatch'


class FiberViolationError(GeometryError):
    """Raised when Psi^dag Psi differs from P(sigma)."""
    code = 'FiberViolation'


class FiberMismatchError(GeometryError):
    """Raised when a purification does not lie over the expected state."""
    code = 'FiberMismatch'


class NotTangentError(GeometryError):
    code = 'NotTangent'


class NegativeRadicandError(GeometryError):
    code = 'NegativeRadicand'


class StepTooLargeError(GeometryError):
    code = 'StepTooLarge'


class GridMismatchError(GeometryError):
    code = 'GridMismatch'


class NotDistinguishableError(GeometryError):
    code = 'NotDistinguishable'


class NotInvertibleError(GeometryError):
    code = 'NotInvertible'


class NotFullRankError(GeometryError):
    code = 'NotFullRank'


class SingularStateError(GeometryError):
    code = 'SingularState'


class InvalidRunConfigError(GeometryError):
    code = 'InvalidRunConfig'


class ParseError(Exception):
    """Raised when an input file is not in the shared JSON formats."""
    code = 'ParseError'

    def __str__(self):
        return f"{self.code}: {super().__str__()}"


class NotInGaugeAlgebraError(GeometryError):
    """Raised when a k x k matrix is not an element of u(sigma)."""
    code = 'NotInGaugeAlgebra'
