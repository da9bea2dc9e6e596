"""Exception hierarchy.

``ParameterError`` subclasses signal bad input (CLI exit code 2);
``NumericalError`` subclasses signal a numerical failure (exit code 3).
"""


class SingminError(Exception):
    pass


class ParameterError(SingminError, ValueError):
    pass


class InvalidParameter(ParameterError):
    pass


class InvalidInput(ParameterError):
    pass


class NoBoundary(ParameterError):
    pass


class NumericalError(SingminError, RuntimeError):
    pass


class IntegrationFailure(NumericalError):
    pass


class SearchFailure(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class LinearSolveFailure(NumericalError):
    pass


class DegenerateGeometry(NumericalError):
    pass


class EmptySweep(NumericalError):
    pass
