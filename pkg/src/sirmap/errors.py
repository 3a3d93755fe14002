"""Exception types shared across the toolkit.

Every deliberate failure path raises a subclass of :class:`SirmapError`,
so callers (and the CLI) can separate validation problems from numerical
breakdowns without string-matching messages.
"""


class SirmapError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SirmapError):
    """Input outside the operation's admissible parameter or state domain."""


class SingularityError(SirmapError):
    """A closed-form denominator or radicand degenerated.

    Raised instead of returning inf/nan when a formula is evaluated at
    (or within 1e-13 of) one of its poles, e.g. the Psi3 pole at
    beta + r = 1.
    """


class ConvergenceError(SirmapError):
    """An iterative solver (Newton corrector, bisection) failed to converge."""


class NumericalBlowupError(SirmapError):
    """An orbit produced NaN or exceeded the divergence threshold.

    Attributes:
        step: iteration index at which the blowup was detected.
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class SmallDivisorError(SirmapError):
    """A homological-equation denominator fell below the safe threshold.

    Carries the resonant exponent pair so callers can tell which term
    degenerated.
    """

    def __init__(self, j: int, k: int, divisor: complex):
        super().__init__(
            f"small divisor at term z^{j} zbar^{k}: |{divisor:.3e}| < 1e-10"
        )
        self.j = j
        self.k = k
        self.divisor = divisor


class OracleFailureError(SirmapError):
    """A numeric reduction produced residuals too large to trust."""
