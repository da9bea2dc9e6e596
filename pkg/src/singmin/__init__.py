"""Numerics for alpha-singular minimal surfaces (density vector along the z-axis)."""

from .errors import (SingminError, ParameterError, InvalidParameter, InvalidInput, NoBoundary,
                     NumericalError, IntegrationFailure, SearchFailure, NoConvergence,
                     LinearSolveFailure, DegenerateGeometry, EmptySweep)

__version__ = "0.1.0"
