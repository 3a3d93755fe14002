"""Closed forms at the codimension-two points on the Neimark-Sacker locus.

Four distinguished points sit on the curve alpha = Psi3(beta, r) for a
given beta: the 1:2, 1:3, and 1:4 strong resonances and the Chenciner
point where the first Lyapunov quantity vanishes.  This module locates
them, evaluates the normal-form coefficients that decide the local
picture, and builds tangent-line models for the homoclinic-type curves
that emanate from the 1:3 and 1:4 points.

Every formula here is a polynomial or rational expression in (N, beta),
so evaluation is exact up to rounding; the numeric reduction oracle is
used only in tests, to cross-check signs and magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import classify
from ..errors import DomainError, SingularityError
from .report import (
    DEGENERATE,
    SUBCRITICAL,
    SUPERCRITICAL,
    Check,
    NormalFormReport,
)

_SQRT3 = math.sqrt(3.0)
_ZERO_TOL = 1e-12

RESONANCE_KINDS = ("R2", "R3", "R4", "CH")


def _polyval(coeffs_ascending: tuple[float, ...], x: float) -> float:
    """Horner evaluation of a polynomial given ascending coefficients."""
    acc = 0.0
    for c in reversed(coeffs_ascending):
        acc = acc * x + c
    return acc


def _require_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")


@dataclass(frozen=True)
class ResonancePoint:
    """A codimension-two point (r*, alpha*) on the NS locus."""

    kind: str
    beta: float
    r_star: float
    alpha_star: float
    in_biological_domain: bool


def resonance_point(beta: float, kind: str) -> ResonancePoint:
    """Locate a strong resonance or the Chenciner point for a given beta.

    R2 sits where the NS locus meets the flip locus (double multiplier
    -1, r* = Psi1); R3 and R4 are the cube-root and fourth-root
    crossings; CH is where the first Lyapunov quantity changes sign.
    All four satisfy alpha* = Psi3(beta, r*) identically.
    """
    _require_beta(beta)
    if kind == "R2":
        r_star = classify.psi1(beta)
        alpha_star = classify.psi3(beta, r_star)
        if alpha_star is None:
            raise SingularityError(f"R2 point sits on the Psi3 pole at beta={beta}")
    elif kind == "R3":
        r_star = (beta * beta - 3.0 * beta + 3.0) / (3.0 - beta)
        alpha_star = 9.0 / (beta * (3.0 - beta))
    elif kind == "R4":
        r_star = (beta * beta - 2.0 * beta + 2.0) / (2.0 - beta)
        alpha_star = 4.0 / (beta * (2.0 - beta))
    elif kind == "CH":
        r_star = (1.0 - beta * beta) / beta
        alpha_star = 1.0 / (beta * (1.0 - beta))
    else:
        raise DomainError(f"unknown resonance kind {kind!r}; expected one of {RESONANCE_KINDS}")
    return ResonancePoint(
        kind=kind,
        beta=beta,
        r_star=r_star,
        alpha_star=alpha_star,
        in_biological_domain=0.0 < r_star < 1.0,
    )


def chenciner_multiplier(beta: float) -> complex:
    """Critical multiplier at the Chenciner point, upper half-plane.

    (3b - 2 - i sqrt(4b - 5b^2)) / (2b - 2); the radicand forces
    beta < 4/5, beyond which the pair leaves the unit circle and the
    point degenerates into a neutral saddle.
    """
    radicand = 4.0 * beta - 5.0 * beta * beta
    if radicand <= 0.0:
        raise SingularityError(
            f"no unit-circle multiplier pair at beta={beta}: need beta < 4/5"
        )
    den = 2.0 * beta - 2.0
    return complex((3.0 * beta - 2.0) / den, -math.sqrt(radicand) / den)


# Numerator of L2 as a degree-12 polynomial in beta, ascending.  Kept for
# regression tests; it factors exactly as
#     -beta^3 (beta-1)^4 (3 beta - 2)^2 (4 beta - 3) (5 beta - 4)^2,
# so against the rational-function denominator everything but
# (1-beta)(3 beta - 2) / (32 N^4 beta^9 (4 beta - 3)) cancels.  The
# expanded polynomial loses ~7 digits to cancellation near beta = 0.7,
# hence the factored evaluation below.
_L2_NUMERATOR = (
    0.0, 0.0, 0.0, 192.0, -2080.0, 9980.0, -27836.0, 49739.0,
    -59048.0, 46574.0, -23536.0, 6915.0, -900.0,
)

_CH_WINDOW_LOW = math.sqrt(5.0) / 2.0 - 1.0


def chenciner_L2(N: float, beta: float) -> NormalFormReport:
    """Second Lyapunov coefficient at the Chenciner point.

    Degenerate NS: the first Lyapunov quantity vanishes here, so the
    fate of nearby invariant circles is decided one order up, by L2.
    The excluded beta values 2/3, 3/4, 4/5 are where the critical
    multiplier hits a strong resonance (or leaves the circle) and the
    fifth-order normal form itself breaks down.
    """
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    _require_beta(beta)
    for bad, label in ((2.0 / 3.0, "beta = 2/3"), (0.75, "beta = 3/4"), (0.8, "beta = 4/5")):
        if abs(beta - bad) < 1e-9:
            raise DomainError(f"Chenciner guard failed: {label} is an excluded value")
    if beta > 0.8:
        raise DomainError(
            f"Chenciner guard failed: beta={beta} >= 4/5, multiplier pair is real"
        )
    mu0 = chenciner_multiplier(beta)
    # cancellation-free form; zeros at 2/3 and 3/4 coincide with the
    # excluded resonance values, so L2 != 0 on the whole guarded domain
    L2 = (
        (1.0 - beta)
        * (3.0 * beta - 2.0)
        / (32.0 * N**4 * beta**9 * (4.0 * beta - 3.0))
    )
    point = resonance_point(beta, "CH")
    checks = (
        Check("L2_nonzero", L2, abs(L2) > 1e-300),
        Check("beta_in_stated_window", beta, _CH_WINDOW_LOW < beta < 0.8),
    )
    # L2 scales as 1/N^4, so judge degeneracy on the N-free magnitude
    if abs(L2) * N**4 < 1e-12:
        crit = DEGENERATE
    elif L2 > 0:
        crit = SUBCRITICAL
    else:
        crit = SUPERCRITICAL
    return NormalFormReport(
        kind="Chenciner",
        coefficients={
            "L2": L2,
            "mu0": mu0,
            "r_star": point.r_star,
            "alpha_star": point.alpha_star,
        },
        criticality=crit,
        nondegeneracy_checks=checks,
        notes=(
            "the published parameter window has an impossible lower bound sqrt(5)/2; "
            "sqrt(5)/2 - 1 is used instead",
            "criticality mirrors the NS convention: positive L2 reported as Subcritical",
        ),
    )


def chenciner_region(eps0: float, eps0_bar: float, L2: float) -> str:
    """Invariant-circle count of the truncated amplitude map.

    In the normalized coordinates the circle radii-squared solve
    eps0 + eps0_bar * rho + L2 * rho^2 = 0, rho > 0.  Region boundaries
    are eps0 = 0 and the fold parabola eps0 = eps0_bar^2 / (4 L2).
    Returns one of "none", "one", "two", "semistable".
    """
    if abs(L2) < _ZERO_TOL:
        raise DomainError("L2 = 0: the quadratic amplitude model is degenerate")
    disc = eps0_bar * eps0_bar - 4.0 * L2 * eps0
    product = eps0 / L2
    total = -eps0_bar / L2
    if product < 0.0:
        return "one"
    if product == 0.0:
        return "one" if total > 0.0 else "none"
    if disc < 0.0:
        return "none"
    if disc == 0.0:
        return "semistable" if total > 0.0 else "none"
    return "two" if total > 0.0 else "none"


def resonance13_coefficients(N: float, beta: float) -> NormalFormReport:
    """Normal-form coefficients b1(0) and c1(0) at the 1:3 resonance.

    b1 never vanishes (its imaginary part is a positive constant over
    the denominator), so condition (R3.1) always holds; Re(c1(0))
    switches sign exactly at beta = 3/4, where (R3.2) fails.  The
    scale-free ratios R_c = Re(c1)/|b1|^2 and I_c = Im(c1)/|b1|^2 are
    what external continuation packages report, up to normalization.
    """
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    _require_beta(beta)
    d2 = (beta - 3.0) ** 2
    d4 = d2 * d2
    b1 = complex(27.0 * (2.0 * beta - 3.0), 27.0 * _SQRT3) / (4.0 * N * beta * d2)
    re_c1 = -243.0 * (4.0 * beta - 3.0) / (8.0 * N * N * beta * d4)
    im_c1 = 243.0 * _SQRT3 * (2.0 * beta - 5.0) / (8.0 * N * N * beta * d4)
    b1_abs2 = 729.0 * (beta * beta - 3.0 * beta + 3.0) / (4.0 * N * N * beta * beta * d4)
    poly = beta * beta - 3.0 * beta + 3.0
    R_c = -beta * (4.0 * beta - 3.0) / (6.0 * poly)
    I_c = _SQRT3 * beta * (2.0 * beta - 5.0) / (6.0 * poly)
    checks = (
        Check("b1_nonzero", abs(b1), abs(b1) > _ZERO_TOL),
        Check("re_c1_nonzero", re_c1, abs(re_c1) > _ZERO_TOL),
    )
    if abs(re_c1) < _ZERO_TOL:
        crit = DEGENERATE
    elif re_c1 < 0:
        crit = SUPERCRITICAL
    else:
        crit = SUBCRITICAL
    return NormalFormReport(
        kind="R3",
        coefficients={
            "b1": b1,
            "c1": complex(re_c1, im_c1),
            "re_c1": re_c1,
            "im_c1": im_c1,
            "b1_abs2": b1_abs2,
            "R_c": R_c,
            "I_c": I_c,
        },
        criticality=crit,
        nondegeneracy_checks=checks,
        notes=(
            "external continuation reports differ from R_c by an undocumented "
            "scale factor; only signs are comparable",
        ),
    )


def resonance14_coefficients(N: float, beta: float) -> NormalFormReport:
    """The complex coefficient A0 = a0 + i b0 at the 1:4 resonance.

    a0 and b0 come out independent of N once the quartic term is
    normalized by |d1|, which is why the N argument only participates
    in validation.  a0 vanishes at beta = 2/3 and b0 at
    beta = (3 - sqrt(5))/2; the radicand polynomial stays positive on
    the whole unit interval.
    """
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    _require_beta(beta)
    radicand = _polyval((80.0, -192.0, 192.0, -96.0, 20.0), beta)
    if radicand <= 0.0:
        raise SingularityError(f"A0 radicand non-positive at beta={beta}")
    root = math.sqrt(radicand)
    a0 = -2.0 * beta * (3.0 * beta - 2.0) / root
    b0 = 4.0 * (beta * beta - 3.0 * beta + 1.0) / root
    A0 = complex(a0, b0)
    in_region_II = abs(A0) > 1.0 and a0 < 0.0
    checks = (
        Check("a0_nonzero", a0, abs(a0) > _ZERO_TOL),
        Check("b0_nonzero", b0, abs(b0) > _ZERO_TOL),
    )
    if abs(a0) < _ZERO_TOL:
        crit = DEGENERATE
    elif a0 < 0:
        crit = SUPERCRITICAL
    else:
        crit = SUBCRITICAL
    return NormalFormReport(
        kind="R4",
        coefficients={"A0": A0, "a0": a0, "b0": b0, "in_region_II": in_region_II},
        criticality=crit,
        nondegeneracy_checks=checks,
        notes=(
            "region-II flag uses the static proxy |A0| > 1 and a0 < 0, which "
            "reproduces the published classification at beta = 0.32 and 0.80685",
        ),
    )


# --- tangent-line models for the homoclinic-type curves -------------------

# chi7 and chi9 split into three polynomial blocks each: a plain part, a
# part multiplied by sqrt(H), and a part multiplied by N^4.  Ascending
# coefficients throughout.

_CHI7_PLAIN = (
    -51200.0, 271360.0, -663552.0, 983040.0, -971776.0,
    664064.0, -313344.0, 98304.0, -18560.0, 1600.0,
)
_CHI7_SQRT = (
    51200.0, -296960.0, 786432.0, -1253376.0, 1328128.0,
    -971776.0, 491520.0, -165888.0, 33920.0, -3200.0,
)
_CHI7_N4 = (
    0.0, 0.0, 0.0, 0.0, 0.0, 2048.0, -17408.0, 64512.0, -138752.0,
    194048.0, -186752.0, 127232.0, -61952.0, 21416.0, -5124.0,
    804.0, -74.0, 3.0,
)

# The plain block of chi9 is exactly the negative of chi7's.
_CHI9_PLAIN = tuple(-c for c in _CHI7_PLAIN)
_CHI9_SQRT = (
    0.0, 25600.0, -122880.0, 270336.0, -356352.0, 307712.0,
    -178176.0, 67584.0, -15360.0, 1600.0,
)
_CHI9_N4 = (
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1024.0, 6656.0, -19456.0, 34048.0,
    -39808.0, 32704.0, -19264.0, 8128.0, -2404.0, 474.0, -56.0, 3.0,
)

# chi8 = 2 (N^2 G - P)(N^2 G + P) and chi10 = 2 chi8, with:
_CHI8_G = (0.0, 0.0, 0.0, -32.0, 112.0, -144.0, 88.0, -26.0, 3.0)
_CHI8_P = (160.0, -384.0, 384.0, -192.0, 40.0)

# chi11, the numerator of H; the N^4-weighted block listed separately.
_CHI11_PLAIN = (
    -12800.0, 48640.0, -80128.0, 73728.0, -40064.0, 12160.0, -1600.0,
)
_CHI11_N4 = (
    0.0, 0.0, 0.0, 0.0, 512.0, -4608.0, 17152.0, -34816.0, 43456.0,
    -35392.0, 19264.0, -6976.0, 1618.0, -218.0, 13.0,
)

HOMOCLINIC_KINDS = ("H3r", "H41", "H42")


@dataclass(frozen=True)
class CurveTangent:
    """First-order model c_r (r - r*) + c_alpha (alpha - alpha*) = 0."""

    kind: str
    beta: float
    r_star: float
    alpha_star: float
    c_r: float
    c_alpha: float

    def evaluate(self, r: float, alpha: float) -> float:
        return self.c_r * (r - self.r_star) + self.c_alpha * (alpha - self.alpha_star)

    @property
    def slope(self) -> float:
        """d alpha / d r along the curve."""
        if abs(self.c_alpha) < _ZERO_TOL:
            raise SingularityError(f"{self.kind} tangent is vertical in (r, alpha)")
        return -self.c_r / self.c_alpha

    def predict_alpha(self, r: float) -> float:
        return self.alpha_star + self.slope * (r - self.r_star)


def _h_discriminant(N: float, beta: float) -> float:
    num = _polyval(_CHI11_PLAIN, beta) + N**4 * _polyval(_CHI11_N4, beta)
    den = (
        1600.0
        * (beta * beta - 14.0 * beta / 5.0 + 2.0) ** 2
        * (beta * beta - 2.0 * beta + 2.0)
    )
    if abs(den) < _ZERO_TOL:
        raise SingularityError(f"H denominator vanishes at beta={beta}")
    return num / den


def homoclinic_curve_tangent(N: float, beta: float, kind: str) -> CurveTangent:
    """Tangent line of a homoclinic-structure curve at its resonance point.

    H3r leaves the 1:3 point; H41 and H42 leave the 1:4 point along the
    two branches that differ by the sign of sqrt(H).  Only the linear
    term of each curve is modeled; that is all the published expansions
    provide.
    """
    if N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    _require_beta(beta)
    if kind == "H3r":
        point = resonance_point(beta, "R3")
        den = 24.0 * (beta * beta - 3.0 * beta + 3.0)
        c_r = -(
            _SQRT3 * (16.0 * beta**3 - 48.0 * beta**2 + 27.0 * beta)
            + 72.0 * beta**3 - 324.0 * beta**2 + 540.0 * beta - 324.0
        ) / den
        c_alpha = (
            beta
            * beta
            * (
                _SQRT3 * (4.0 * beta * beta - 11.0 * beta + 6.0)
                + 12.0 * beta * beta - 36.0 * beta + 36.0
            )
            / den
        )
    elif kind in ("H41", "H42"):
        point = resonance_point(beta, "R4")
        H = _h_discriminant(N, beta)
        if H < 0.0:
            raise SingularityError(
                f"H < 0 at N={N}, beta={beta}: the 1:4 branch pair is not real"
            )
        sqrt_h = math.sqrt(H) if kind == "H41" else -math.sqrt(H)
        n2 = N * N
        g = _polyval(_CHI8_G, beta)
        p = _polyval(_CHI8_P, beta)
        chi8 = 2.0 * (n2 * g - p) * (n2 * g + p)
        chi10 = 2.0 * chi8
        if abs(chi8) < _ZERO_TOL:
            raise SingularityError(f"chi8 vanishes at N={N}, beta={beta}")
        chi7 = (
            _polyval(_CHI7_PLAIN, beta)
            + sqrt_h * _polyval(_CHI7_SQRT, beta)
            + N**4 * _polyval(_CHI7_N4, beta)
        )
        chi9 = beta * (
            _polyval(_CHI9_PLAIN, beta)
            + sqrt_h * _polyval(_CHI9_SQRT, beta)
            + N**4 * _polyval(_CHI9_N4, beta)
        )
        c_r = -chi7 / chi8
        c_alpha = -chi9 / chi10
    else:
        raise DomainError(
            f"unknown curve kind {kind!r}; expected one of {HOMOCLINIC_KINDS}"
        )
    return CurveTangent(
        kind=kind,
        beta=beta,
        r_star=point.r_star,
        alpha_star=point.alpha_star,
        c_r=c_r,
        c_alpha=c_alpha,
    )
