"""Bifurcation toolkit for a three-component discrete epidemic map.

The map couples susceptible/infected/recovered counts through a
quadratic incidence term; its planar core closes in the first two
components, which is what makes every bifurcation object here (flip
and torus-birth thresholds, strong resonances, the degenerate torus
point, Arnold tongues) computable in closed form and checkable against
a numeric normal-form oracle.
"""

from . import classify, continuation, model, normalforms, orbits, reduction
from .errors import (
    ConvergenceError,
    DomainError,
    NumericalBlowupError,
    OracleFailureError,
    SingularityError,
    SirmapError,
    SmallDivisorError,
)
from .model import Params

__all__ = [
    "ConvergenceError",
    "DomainError",
    "NumericalBlowupError",
    "OracleFailureError",
    "Params",
    "SingularityError",
    "SirmapError",
    "SmallDivisorError",
    "classify",
    "continuation",
    "model",
    "normalforms",
    "orbits",
    "reduction",
]
