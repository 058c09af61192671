"""Exception and warning types raised by the solvers."""


class SusyDiracError(Exception):
    """Base class for all library errors."""


class PoleAtNonPositiveInteger(SusyDiracError, ValueError):
    pass


class ConvergenceFailure(SusyDiracError, ArithmeticError):
    pass


class OrderOutOfRange(SusyDiracError, ValueError):
    pass


class NonConstantV(SusyDiracError, ValueError):
    pass


class GridTooCoarse(SusyDiracError, ValueError):
    pass


class BoxTooSmall(SusyDiracError):
    pass


class NotNormalizable(SusyDiracError):
    pass


class Indeterminate(SusyDiracError):
    pass


class NegativeEpsilon(SusyDiracError, ValueError):
    pass


class MissingPartner(SusyDiracError, ValueError):
    pass


class IncompleteBasis(SusyDiracError, ValueError):
    pass


class InvalidLevel(SusyDiracError, ValueError):
    pass


class NearPole(SusyDiracError):
    pass


class MethodUnavailable(SusyDiracError):
    pass


class NotConfining(SusyDiracError):
    pass


class QuadratureFailure(SusyDiracError, ArithmeticError):
    pass


class RegimeMismatch(SusyDiracError):
    pass


class RootNotBracketed(SusyDiracError):
    pass


class ContinuumThresholdWarning(UserWarning):
    """Level lies above the edge value of Phi^2, so it is a box artifact."""


class TrivialSusyWarning(UserWarning):
    """The superpotential is constant on the grid."""
