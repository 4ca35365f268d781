"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`FreeConvError`; the CLI reports ``type(err).__name__`` so the class
names below double as the machine-readable error vocabulary.
"""


class FreeConvError(Exception):
    """Base class for all library errors."""


# measures
class EmptyMeasure(FreeConvError, ValueError):
    pass


class MassNotNormalized(FreeConvError, ValueError):
    pass


class NonpositiveMass(FreeConvError, ValueError):
    pass


class OrderTooLarge(FreeConvError, ValueError):
    pass


# transforms
class PoleAtAtom(FreeConvError, ArithmeticError):
    pass


class ZeroCauchyTransform(FreeConvError, ArithmeticError):
    pass


class RootFindingFailure(FreeConvError, RuntimeError):
    pass


# freeid
class InvalidStableParameters(FreeConvError, ValueError):
    pass


class PoleAtSigmaNode(FreeConvError, ArithmeticError):
    pass


class DegenerateLaw(FreeConvError, ValueError):
    pass


class CurveMonotonicityViolation(FreeConvError, RuntimeError):
    pass


class NoConvergence(FreeConvError, RuntimeError):
    pass


class BracketExpansionFailure(FreeConvError, RuntimeError):
    pass


class EvaluationAtSingularity(FreeConvError, ArithmeticError):
    pass


class ZeroJump(FreeConvError, ValueError):
    pass


# convpow
class SubordinationMismatch(FreeConvError, RuntimeError):
    pass


class NoAdmissibleRoot(FreeConvError, RuntimeError):
    pass


# superconv
class RowUnavailable(FreeConvError, ValueError):
    pass


class TargetRequired(FreeConvError, ValueError):
    pass


class GridMismatch(FreeConvError, ValueError):
    pass


class InvalidExponent(FreeConvError, ValueError):
    pass


class CutoffTooSmall(FreeConvError, ValueError):
    pass


class MissingExclusion(FreeConvError, ValueError):
    pass
