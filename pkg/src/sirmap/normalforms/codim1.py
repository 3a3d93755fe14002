"""Codimension-one bifurcation coefficients in closed form.

Three loci: the transcritical exchange at alpha = beta + r, the flip
at alpha = Psi2(beta, r), and the Neimark-Sacker crossing at
alpha = Psi3(beta, r).  Each operation returns a NormalFormReport with
the deciding coefficients and the non-degeneracy conditions of the
corresponding theorem.
"""

from __future__ import annotations

import math

from .. import classify
from ..errors import DomainError, SingularityError
from ..model import DENOM_GUARD, Params
from .report import (
    DEGENERATE,
    SUBCRITICAL,
    SUPERCRITICAL,
    Check,
    NormalFormReport,
)

_ZERO_TOL = 1e-12


def transcritical_nondegeneracy(p: Params, tol: float = 1e-9) -> NormalFormReport:
    """Quadratic and cross coefficients of the reduced map at E1.

    At alpha = beta + r the reduced scalar map is
    u -> u + u*delta - (beta+r)^2/(N r) u^2 + ..., so the second
    derivative is -2(beta+r)^2/(N r) and the u-delta cross derivative
    is exactly 1.  Both are nonzero throughout the biological domain:
    the bifurcation is always a nondegenerate exchange of stability,
    with the endemic branch stable on the supercritical side.
    """
    s = p.beta + p.r
    if abs(p.alpha - s) > tol * (1.0 + abs(s)):
        raise DomainError(
            f"transcritical locus requires alpha = beta + r, got "
            f"alpha={p.alpha}, beta+r={s}"
        )
    quad = -2.0 * s * s / (p.N * p.r)
    cross = 1.0
    checks = (
        Check("quadratic_nonzero", quad, abs(quad) > _ZERO_TOL),
        Check("transversal_cross_term", cross, True),
    )
    return NormalFormReport(
        kind="Transcritical",
        coefficients={"quadratic": quad, "cross": cross},
        criticality=SUPERCRITICAL,
        nondegeneracy_checks=checks,
    )


def _flip_denominator(beta: float, r: float) -> float:
    return beta * beta + (r - 4.0) * beta - 4.0 * r + 4.0


def flip_theta1(beta: float, r: float) -> float:
    den = (beta + r) * _flip_denominator(beta, r)
    if abs(den) < DENOM_GUARD:
        raise SingularityError(f"Theta1 pole at beta={beta}, r={r}")
    return -((beta + r - 2.0) ** 2) * beta / den


def flip_theta2(N: float, beta: float, r: float) -> float:
    s = beta + r
    den = N * N * r * r * beta * beta * _flip_denominator(beta, r)
    if abs(den) < DENOM_GUARD:
        raise SingularityError(f"Theta2 pole at beta={beta}, r={r}")
    return (
        2.0
        * s
        * (s - 2.0)
        * (beta * beta + beta * r - 4.0) ** 2
        * (beta * beta + beta * r - 2.0 * beta - r)
        / den
    )


def flip_coefficients(N: float, beta: float, r: float) -> NormalFormReport:
    """Flip coefficients Theta1 (transversality) and Theta2 (criticality).

    Implicitly evaluated on the flip locus alpha = Psi2(beta, r).  For
    r above Psi1(beta) the published statement names the same two
    quantities Theta3 and Theta4; both aliases are reported there.  The
    criticality clause as printed refers to an undefined Theta5; it is
    read as Theta4, and the report notes the substitution.
    """
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if not 0 < r < 1:
        raise DomainError(f"flip regime needs 0 < r < 1, got {r}")
    th1 = flip_theta1(beta, r)
    th2 = flip_theta2(N, beta, r)
    regime_split = classify.psi1(beta)
    high_regime = r > regime_split
    coeffs: dict[str, complex | float] = {"theta1": th1, "theta2": th2}
    notes: tuple[str, ...] = ()
    if high_regime:
        coeffs["theta3"] = th1
        coeffs["theta4"] = th2
        notes = (
            "criticality clause printed in terms of the undefined Theta5; "
            "interpreted as Theta4",
        )
    if abs(th2) < _ZERO_TOL:
        crit = DEGENERATE
    elif th2 > 0:
        crit = SUPERCRITICAL
    else:
        crit = SUBCRITICAL
    checks = (
        Check("theta1_nonzero", th1, abs(th1) > _ZERO_TOL),
        Check("theta2_nonzero", th2, abs(th2) > _ZERO_TOL),
    )
    return NormalFormReport(
        kind="Flip",
        coefficients=coeffs,
        criticality=crit,
        nondegeneracy_checks=checks,
        notes=notes,
    )


def first_lyapunov_A(N: float, beta: float, r: float) -> float:
    """The raw first Lyapunov quantity on the NS locus.

    A = -((beta^2 + beta r - 1)(beta + r)^4) / (8 N^2 (beta + r - 1)).
    Only the beta + r = 1 pole is guarded here; regime and resonance
    checks live in :func:`ns_first_lyapunov`.
    """
    den = 8.0 * N * N * (beta + r - 1.0)
    if abs(beta + r - 1.0) < DENOM_GUARD:
        raise SingularityError(
            f"first Lyapunov quantity pole at beta + r = 1 (beta={beta}, r={r})"
        )
    return -((beta * beta + beta * r - 1.0) * (beta + r) ** 4) / den


def ns_excluded_r(beta: float) -> dict[str, float]:
    """The r values excluded by the NS theorem at a given beta.

    Strong 1:3 and 1:4 resonances, the Psi3 pole (which is also the
    1:1/primary degeneracy), and the Chenciner locus where A vanishes.
    """
    return {
        "r3_resonance": -(beta * beta - 3.0 * beta + 3.0) / (beta - 3.0),
        "r4_resonance": -(beta * beta - 2.0 * beta + 2.0) / (beta - 2.0),
        "pole": 1.0 - beta,
        "chenciner": -(beta * beta - 1.0) / beta,
    }


def ns_first_lyapunov(N: float, beta: float, r: float) -> NormalFormReport:
    """Neimark-Sacker criticality on alpha = Psi3(beta, r).

    Subcritical exactly when A > 0 (an unstable invariant circle
    surrounds the stable fixed point).  The excluded r values (strong
    resonances, Chenciner) are reported as failed non-degeneracy
    checks rather than raised, so continuation sweeps can keep
    evaluating through them; only the beta + r = 1 pole raises.
    """
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    value = first_lyapunov_A(N, beta, r)
    checks = [Check("A_nonzero", value, abs(value) > _ZERO_TOL)]
    regime_lo = classify.psi1(beta)
    checks.append(
        Check("r_in_ns_regime", r, regime_lo < r < 1.0)
    )
    for name, bad_r in ns_excluded_r(beta).items():
        gap = abs(r - bad_r)
        checks.append(Check(f"r_clear_of_{name}", gap, gap > 1e-9 * (1.0 + abs(bad_r))))
    if abs(value) < _ZERO_TOL:
        crit = DEGENERATE
    elif value > 0:
        crit = SUBCRITICAL
    else:
        crit = SUPERCRITICAL
    return NormalFormReport(
        kind="NeimarkSacker",
        coefficients={"A": value},
        criticality=crit,
        nondegeneracy_checks=tuple(checks),
    )


def ns_transversality(beta: float, r: float) -> float:
    """d|mu|/d alpha across the NS locus: beta (beta + r - 1)/(2(beta+r)).

    Nonzero whenever beta + r != 1, i.e. away from the Psi3 pole.
    """
    s = beta + r
    if abs(s) < DENOM_GUARD:
        raise SingularityError("beta + r = 0")
    return beta * (s - 1.0) / (2.0 * s)
