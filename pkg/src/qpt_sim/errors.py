"""Exception types raised by the simulation kernels.

Every error carries a short ``code`` used by the sweep engine to mask grid
points (rendered as ``MASKED:<code>`` in emitted tables).
"""


class QptError(Exception):
    code = "ERROR"


class NonFinite(QptError, ValueError):
    code = "NON_FINITE"


class NonPositiveKappa(QptError, ValueError):
    code = "NON_POSITIVE_KAPPA"


class NegativeGain(QptError, ValueError):
    code = "NEGATIVE_GAIN"


class NegativeLength(QptError, ValueError):
    code = "NEGATIVE_LENGTH"


class PhaseError(QptError, ValueError):
    code = "PHASE"


class SingularLength(QptError, ArithmeticError):
    """The boundary-value problem diverges: sin(beta*l +/- epsilon) vanishes."""

    code = "SINGULAR"


class InternalConsistency(QptError, ArithmeticError):
    """A closed form that must be real came out with a sizeable imaginary part."""

    code = "INTERNAL"


class DegenerateFlux(QptError, ArithmeticError):
    code = "DEGENERATE_FLUX"


class NegativeDiscriminant(QptError, ArithmeticError):
    code = "NEGATIVE_DISCRIMINANT"


class IllConditioned(QptError, ArithmeticError):
    code = "ILL_CONDITIONED"


class SingularRearrangement(QptError, ArithmeticError):
    code = "SINGULAR_REARRANGEMENT"


class NotGaussianValid(QptError, ValueError):
    code = "NOT_GAUSSIAN_VALID"


class SpecError(QptError, ValueError):
    code = "SPEC"


class UnknownFigure(SpecError):
    code = "UNKNOWN_FIGURE"
