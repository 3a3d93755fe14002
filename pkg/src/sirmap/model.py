"""The discrete SIR map, its fixed points, Jacobians and multipliers.

The map acts on (x, y, z) = (susceptible, infective, recovered):

    x' = x - alpha*x*y/N + beta*(N - x)
    y' = (1 - beta - r)*y + alpha*x*y/N
    z' = (1 - beta)*z + r*y

Two fixed points exist: the disease-free point E1 = (N, 0, 0), always,
and the endemic point E2, present exactly when alpha > beta + r.  The
(x, y) subsystem is closed (z never feeds back), so the planar 2x2
Jacobian block decides everything except the always-real multiplier
1 - beta carried by the z direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError

# Closed-form denominators below this are treated as poles rather than
# evaluated to inf.
DENOM_GUARD = 1e-13


def _require_finite(label: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"{label} contains a non-finite component: {v!r}")


@dataclass(frozen=True)
class Params:
    """Model parameters (N, beta, r, alpha).

    The biological domain of the stability tables is N>0, 0<beta<1,
    0<r<1, alpha>0.  Values with r >= 1 are accepted (continuation runs
    need them; the Chenciner point at beta=0.32 sits at r=2.805) but are
    flagged via ``in_biological_domain``.
    """

    N: float
    beta: float
    r: float
    alpha: float

    def __post_init__(self):
        _require_finite("Params", self.N, self.beta, self.r, self.alpha)
        if self.N <= 0:
            raise DomainError(f"total population N must be positive, got {self.N}")
        if not 0 < self.beta < 1:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if self.r <= 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    @property
    def in_biological_domain(self) -> bool:
        return self.r < 1

    @property
    def contact_scale(self) -> float:
        """alpha/N, the coefficient of the incidence term x*y."""
        return self.alpha / self.N


State3 = tuple[float, float, float]


@dataclass(frozen=True)
class MultiplierSet:
    """Multipliers of a fixed point: the planar pair plus 1-beta.

    ``delta`` is the discriminant of the planar quadratic; the pair
    (t1, t2) is complex-conjugate exactly when delta < 0, with t1 taken
    in the upper half plane.
    """

    mu_real: float
    t1: complex
    t2: complex
    delta: float

    @property
    def is_complex_pair(self) -> bool:
        return self.delta < 0

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.mu_real], dtype=complex)


@dataclass(frozen=True)
class FixedPointRecord:
    which: str  # "E1" or "E2"
    point: State3
    jacobian: np.ndarray
    multipliers: MultiplierSet
    topo_type: "object" = None  # classify.TopoType, attached lazily
    coincident: bool = False  # E1 == E2 (alpha = beta + r)

    def residual(self, p: Params) -> float:
        fs = map_step(p, self.point)
        return max(abs(a - b) for a, b in zip(fs, self.point))


def map_step(p: Params, s: State3) -> State3:
    """One application of the map.  Exact per-component arithmetic."""
    x, y, z = s
    _require_finite("state", x, y, z)
    a = p.alpha / p.N
    return (
        x - a * x * y + p.beta * (p.N - x),
        (1.0 - p.beta - p.r) * y + a * x * y,
        (1.0 - p.beta) * z + p.r * y,
    )


def endemic_point(p: Params) -> State3:
    """The E2 formula, evaluated without existence checks."""
    s = p.beta + p.r
    xs = p.N * s / p.alpha
    excess = p.alpha - s
    ys = p.beta * p.N * excess / (p.alpha * s)
    zs = p.r * p.N * excess / (p.alpha * s)
    return (xs, ys, zs)


def fixed_points(p: Params, coincidence_tol: float = 1e-12) -> list[FixedPointRecord]:
    """E1 always; E2 when alpha > beta + r.

    At alpha = beta + r (within ``coincidence_tol`` relative) the two
    points coincide; only E1 is returned, carrying ``coincident=True``.
    """
    s = p.beta + p.r
    coincident = abs(p.alpha - s) <= coincidence_tol * (1.0 + abs(s))
    e1: State3 = (p.N, 0.0, 0.0)
    records = [
        FixedPointRecord(
            which="E1",
            point=e1,
            jacobian=jacobian_at(p, e1),
            multipliers=_multipliers_at_E1(p),
            coincident=coincident,
        )
    ]
    if p.alpha > s and not coincident:
        e2 = endemic_point(p)
        records.append(
            FixedPointRecord(
                which="E2",
                point=e2,
                jacobian=jacobian_at(p, e2),
                multipliers=multipliers_E2(p),
            )
        )
    return records


def jacobian_at(p: Params, s: State3) -> np.ndarray:
    """Jacobian of the map at an arbitrary state (the map is quadratic)."""
    x, y, _ = s
    a = p.alpha / p.N
    return np.array(
        [
            [1.0 - a * y - p.beta, -a * x, 0.0],
            [a * y, 1.0 - p.beta - p.r + a * x, 0.0],
            [0.0, p.r, 1.0 - p.beta],
        ]
    )


def planar_block_E2(p: Params) -> np.ndarray:
    """The (x, y) Jacobian block at E2 in closed form.

    Entries:  [[(beta + r - alpha*beta)/(beta + r), -(beta + r)],
               [beta*(alpha - beta - r)/(beta + r),  1        ]]
    """
    s = p.beta + p.r
    return np.array(
        [
            [(s - p.alpha * p.beta) / s, -s],
            [p.beta * (p.alpha - s) / s, 1.0],
        ]
    )


def planar_discriminant(p: Params) -> float:
    """Discriminant of the planar characteristic polynomial at E2.

    Polynomial in (alpha, beta, r); equals (beta+r)^2 * (tr^2 - 4 det)
    of the planar block, and vanishes exactly on the node/focus
    boundaries Upsilon_1, Upsilon_2.
    """
    al, b, r = p.alpha, p.beta, p.r
    return (
        al * al * b * b
        - 4 * al * b**3
        - 8 * al * b * b * r
        - 4 * al * b * r * r
        + 4 * b**4
        + 12 * b**3 * r
        + 12 * b * b * r * r
        + 4 * b * r**3
    )


def multipliers_E2(p: Params) -> MultiplierSet:
    """Closed-form multipliers of E2.

    t_{1,2} = (-beta*alpha + 2 beta + 2 r +/- sqrt(Delta)) / (2 beta + 2 r),
    with t1 the upper-half-plane root when Delta < 0.
    """
    s = p.beta + p.r
    if p.alpha <= s:
        raise DomainError(
            f"E2 requires alpha > beta + r ({p.alpha} <= {s}); no multipliers"
        )
    delta = planar_discriminant(p)
    # Snap roundoff residue to an exact double root: the discriminant
    # polynomial carries absolute noise ~eps * (sum of term magnitudes),
    # and sqrt() would amplify it to ~1e-8 errors in the multipliers at
    # strong-resonance parameter points.
    al, b, r = p.alpha, p.beta, p.r
    magnitude = (
        al * al * b * b
        + 4 * al * b**3
        + 8 * al * b * b * r
        + 4 * al * b * r * r
        + 4 * b**4
        + 12 * b**3 * r
        + 12 * b * b * r * r
        + 4 * b * r**3
    )
    if abs(delta) <= 4e-15 * magnitude:
        delta = 0.0
    num = -p.beta * p.alpha + 2 * p.beta + 2 * p.r
    den = 2 * s
    if delta >= 0:
        root = math.sqrt(delta)
        t1 = (num + root) / den
        t2 = (num - root) / den
    else:
        root = math.sqrt(-delta)
        t1 = complex(num / den, root / den)
        t2 = t1.conjugate()
    return MultiplierSet(mu_real=1.0 - p.beta, t1=t1, t2=t2, delta=delta)


def _multipliers_at_E1(p: Params) -> MultiplierSet:
    # Planar block at E1 is triangular: eigenvalues 1-beta and
    # 1-beta-r+alpha; discriminant of the pair is the squared gap.
    t1 = 1.0 - p.beta
    t2 = 1.0 - p.beta - p.r + p.alpha
    delta = (t1 - t2) ** 2
    lo, hi = sorted((t1, t2))
    return MultiplierSet(mu_real=1.0 - p.beta, t1=hi, t2=lo, delta=delta)


def planar_charpoly_coeffs(p: Params) -> tuple[float, float]:
    """(trace, determinant) of the planar block at E2, closed form.

    The planar characteristic polynomial is t^2 - trace*t + det; the
    full 3x3 characteristic polynomial is that times (t - (1-beta)).
    """
    s = p.beta + p.r
    trace = (2 * p.beta + 2 * p.r - p.alpha * p.beta) / s
    det = (s - p.alpha * p.beta) / s + p.beta * (p.alpha - s)
    return trace, det


def population_excess_factor(p: Params) -> float:
    """Factor by which (x+y+z) - N contracts per step: exactly 1-beta."""
    return 1.0 - p.beta


def guard_denominator(value: float, what: str) -> float:
    """Raise SingularityError when a closed-form denominator is ~zero."""
    if abs(value) < DENOM_GUARD:
        raise SingularityError(f"{what} degenerates: denominator {value:.3e}")
    return value
