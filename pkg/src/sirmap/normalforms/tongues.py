"""Arnold tongues rooted on the Neimark-Sacker locus.

For a rotation number n/m (m at least 5, so the resonance is weak) the
tongue apex sits on the NS curve where the multiplier argument equals
2 pi n/m.  Near the apex the tongue is the wedge T- < w2 < T+ in the
detuning coordinates

    w1 = |t| - 1            (radial distance from the unit circle),
    w2 = arg(t) - 2 pi n/m  (angular detuning),

whose half-width scales like w1^((m-2)/2).  Inside the wedge the map
has an attracting and a repelling m-periodic orbit on the invariant
circle; outside, the circle carries quasiperiodic motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import reduction
from ..errors import DomainError, SingularityError
from ..model import DENOM_GUARD, Params, planar_discriminant
from .codim1 import _flip_denominator, first_lyapunov_A

_TWO_PI = 2.0 * math.pi


def tongue_apex(beta: float, n: int, m: int) -> tuple[float, float]:
    """Apex (r*, alpha*) of the n/m tongue; lies on alpha = Psi3 exactly."""
    c = math.cos(_TWO_PI * n / m)
    den = beta + 2.0 * c - 2.0
    if abs(den) < DENOM_GUARD:
        raise SingularityError(
            f"tongue apex degenerates at beta = 2 - 2 cos(2 pi {n}/{m})"
        )
    r_star = -(beta * beta + 2.0 * beta * c - 2.0 * beta - 2.0 * c + 2.0) / den
    alpha_star = -4.0 * (c - 1.0) ** 2 / (beta * den)
    return r_star, alpha_star


def _k_factor(beta: float, r: float) -> float:
    # Degree-7 polynomial in beta with r-dependent coefficients; one of
    # the two nontrivial factors in the numerator of rho2tilde.
    coeffs = (
        2.0 * r * (r - 1.0) ** 2,
        4.0 * r**3 - 6.0 * r * r + 2.0 * r,
        4.0 * r**3 + 7.0 * r * r - 17.0 * r + 6.0,
        -5.0 * r**3 + 16.0 * r * r + 2.0 * r - 9.0,
        r**3 - 15.0 * r * r + 20.0 * r - 1.0,
        3.0 * r * r - 15.0 * r + 8.0,
        3.0 * r - 5.0,
        1.0,
    )
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * beta + c
    return acc


def rho2tilde(N: float, beta: float, r: float) -> float:
    """The linear tongue-axis coefficient at the apex, -chi15/chi16."""
    s = beta + r
    flip_den = _flip_denominator(beta, r)
    radicand = -beta * flip_den * s
    if radicand < 0.0:
        raise SingularityError(
            f"rho2tilde radicand negative at beta={beta}, r={r}"
        )
    chi15 = math.sqrt(radicand) * s**3 * _k_factor(beta, r)
    chi16 = (
        8.0
        * (beta * beta + (r - 3.0) * beta - 3.0 * r + 3.0)
        * beta
        * beta
        * flip_den
        * N
        * N
        * (s - 1.0)
    )
    if abs(chi16) < DENOM_GUARD:
        raise SingularityError(f"chi16 vanishes at beta={beta}, r={r}")
    return -chi15 / chi16


def numeric_sigma_abs(N: float, beta: float, n: int, m: int) -> float:
    """|sigma(0)| from the resonant normal form at the apex.

    The coefficient of wbar^(m-1) survives the m-resonant elimination;
    its modulus is the one quantity in the tongue model with no
    published closed form for general m.
    """
    r_star, alpha_star = tongue_apex(beta, n, m)
    p = Params(N=N, alpha=alpha_star, beta=beta, r=r_star)
    series = reduction.numeric_normal_form(p, order=m - 1, m=m)
    return abs(series.get((0, m - 1), 0.0))


@dataclass(frozen=True)
class TongueSpec:
    """Wedge model of one Arnold tongue near its apex."""

    n: int
    m: int
    N: float
    beta: float
    r_star: float
    alpha_star: float
    rho3_0: float
    rho2tilde_0: float
    sigma_abs: float

    def omega1(self, r: float, alpha: float) -> float:
        """Radial detuning |t| - 1 at (r, alpha); positive outside the circle."""
        b = self.beta
        num = (
            -b**3
            + (alpha - 2.0 * r) * b * b
            - (r - 1.0) * (r - alpha + 1.0) * b
            + r
        )
        den = b + r
        ratio = num / den
        if ratio < 0.0:
            raise DomainError(
                f"multiplier product negative at (r={r}, alpha={alpha}); "
                "no rotation to detune"
            )
        return math.sqrt(ratio) - 1.0

    def omega2(self, r: float, alpha: float) -> float:
        """Angular detuning arg(t) - 2 pi n/m, with the quadrant-correct angle."""
        b = self.beta
        p = Params(N=self.N, alpha=alpha, beta=b, r=r)
        xi0 = -planar_discriminant(p)
        if xi0 < 0.0:
            raise DomainError(
                f"multipliers real at (r={r}, alpha={alpha}); no rotation angle"
            )
        angle = math.atan2(math.sqrt(xi0), (2.0 - alpha) * b + 2.0 * r)
        return angle - _TWO_PI * self.n / self.m

    def _boundaries(self, r: float, alpha: float) -> tuple[float, float]:
        w1 = self.omega1(r, alpha)
        if w1 < 0.0:
            raise DomainError(
                "tongue boundaries are defined on the unstable side |t| > 1"
            )
        half_exp = 0.5 * (self.m - 2)
        axis = (self.rho2tilde_0 / self.rho3_0) * w1
        half_width = (self.sigma_abs / abs(self.rho3_0) ** half_exp) * w1**half_exp
        return axis - half_width, axis + half_width

    def T_minus(self, r: float, alpha: float) -> float:
        return self._boundaries(r, alpha)[0]

    def T_plus(self, r: float, alpha: float) -> float:
        return self._boundaries(r, alpha)[1]

    def contains(self, r: float, alpha: float) -> bool:
        """Whether (r, alpha) lies inside the wedge (phase-locked region)."""
        try:
            w1 = self.omega1(r, alpha)
            w2 = self.omega2(r, alpha)
        except DomainError:
            return False
        if w1 <= 0.0:
            return False
        lo, hi = self._boundaries(r, alpha)
        return lo < w2 < hi


def arnold_tongue(
    N: float,
    beta: float,
    n: int,
    m: int,
    sigma_abs: float | None = None,
) -> TongueSpec:
    """Build the wedge model of the n/m tongue.

    sigma_abs may be supplied (e.g. from an external computation); when
    omitted it is fitted numerically from the resonant normal form at
    the apex.  Rotation numbers are taken in (0, 1/2): the n/m and
    (m-n)/m tongues are the same parameter set, so callers holding
    n > m/2 should pass the mirror index m - n.
    """
    if m < 5:
        raise DomainError(f"tongue model needs m >= 5, got m={m}")
    if n < 1 or math.gcd(n, m) != 1:
        raise DomainError(f"n/m must be a reduced positive fraction, got {n}/{m}")
    if 2 * n >= m:
        raise DomainError(
            f"rotation number {n}/{m} >= 1/2: pass the mirror index n={m - n}"
        )
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    r_star, alpha_star = tongue_apex(beta, n, m)
    rho3_0 = first_lyapunov_A(N, beta, r_star)
    if abs(rho3_0) < 1e-14:
        raise SingularityError(
            "first Lyapunov quantity vanishes at the apex; the wedge model "
            "needs a nondegenerate NS point"
        )
    rho2tilde_0 = rho2tilde(N, beta, r_star)
    if sigma_abs is None:
        sigma_abs = numeric_sigma_abs(N, beta, n, m)
    return TongueSpec(
        n=n,
        m=m,
        N=N,
        beta=beta,
        r_star=r_star,
        alpha_star=alpha_star,
        rho3_0=rho3_0,
        rho2tilde_0=rho2tilde_0,
        sigma_abs=sigma_abs,
    )
