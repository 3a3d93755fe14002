"""Parameter-space classification of the two fixed points.

The endemic point's stability region in alpha is carved up by five
thresholds.  Two of them (Upsilon_1 <= Upsilon_2) are the roots of the
planar discriminant and separate node from focus-node behaviour; they
are not bifurcations.  The other three are:

    Psi1(beta)     : the r value where the flip and Neimark-Sacker
                     boundaries swap order (1:2 resonance regime),
    Psi2(beta, r)  : the flip locus (planar multiplier -1),
    Psi3(beta, r)  : the Neimark-Sacker locus (complex pair on the
                     unit circle), with a pole at beta + r = 1.

Case labels follow the published stability table: D1/L1/D2 for the
disease-free point, D11..D34 and L11..L2 for the endemic one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import model
from .errors import DomainError
from .model import Params

#: Relative tolerance for declaring a boundary equality (alpha sitting
#: exactly on a bifurcation locus).
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class Thresholds:
    """The five alpha/r thresholds at fixed (beta, r).

    ``psi3`` is None exactly when beta + r is at its pole (beta+r=1);
    the remaining fields are always populated.  ``psi2`` can likewise
    vanish into its own pole at beta + r = 2, which is outside the
    biological domain but reachable in extended-domain scans.
    """

    psi1: float
    psi2: Optional[float]
    psi3: Optional[float]
    upsilon1: float
    upsilon2: float

    @property
    def poles(self) -> tuple[str, ...]:
        out = []
        if self.psi2 is None:
            out.append("psi2")
        if self.psi3 is None:
            out.append("psi3")
        return tuple(out)


def psi1(beta: float) -> float:
    """Regime-splitting value of r: (beta-2)^2/(4-beta)."""
    return -(beta * beta - 4 * beta + 4) / (beta - 4)


def psi2(beta: float, r: float) -> Optional[float]:
    """Flip locus in alpha; None at the beta+r=2 pole."""
    den = beta * (r + beta - 2)
    if abs(den) < model.DENOM_GUARD:
        return None
    return (beta**3 + 2 * r * beta**2 + r * r * beta - 4 * beta - 4 * r) / den


def psi3(beta: float, r: float) -> Optional[float]:
    """Neimark-Sacker locus in alpha; None at the beta+r=1 pole."""
    den = r + beta - 1
    if abs(den) < model.DENOM_GUARD:
        return None
    return (beta + r) ** 2 / den


def upsilons(beta: float, r: float) -> tuple[float, float]:
    """Roots of the planar discriminant in alpha (node/focus edges)."""
    radicand = r * beta**3 + 3 * r * r * beta**2 + 3 * r**3 * beta + r**4
    if radicand < 0:
        # r(beta+r)^3 < 0 cannot happen for positive parameters; keep a
        # defensive clamp for extended scans with odd inputs.
        radicand = 0.0
    root = math.sqrt(radicand)
    s2 = (beta + r) ** 2
    return 2 * (s2 - root) / beta, 2 * (s2 + root) / beta


def thresholds(beta: float, r: float) -> Thresholds:
    """All five thresholds; pole-struck fields come back as None."""
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if not math.isfinite(r):
        raise DomainError(f"r must be finite, got {r}")
    u1, u2 = upsilons(beta, r)
    return Thresholds(
        psi1=psi1(beta),
        psi2=psi2(beta, r),
        psi3=psi3(beta, r),
        upsilon1=u1,
        upsilon2=u2,
    )


@dataclass(frozen=True)
class TopoType:
    """Stability tag plus the stability-table case label.

    When the point sits on a bifurcation boundary (within BOUNDARY_TOL
    relative in the deciding comparison) the tag is NonHyperbolic and
    ``nearby`` carries the two flanking open-region labels.
    """

    tag: str
    case_label: str
    nearby: tuple[str, str] | None = None


STABLE_NODE = "StableNode"
STABLE_FOCUS_NODE = "StableFocusNode"
SADDLE_POINT = "SaddlePoint"
SADDLE_FOCUS = "SaddleFocus"
NON_HYPERBOLIC = "NonHyperbolic"
UNSTABLE_NODE = "UnstableNode"
UNSTABLE_FOCUS_NODE = "UnstableFocusNode"


def _close(a: float, b: float, tol: float = BOUNDARY_TOL) -> bool:
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def classify_E1(p: Params) -> TopoType:
    """Table-1 classification of the disease-free point.

    All three multipliers are real (1-beta twice, 1-beta-r+alpha), so
    only node/saddle/non-hyperbolic cases arise.
    """
    s = p.beta + p.r
    if _close(p.alpha, s):
        return TopoType(NON_HYPERBOLIC, "L1", nearby=("D1", "D2"))
    if p.alpha < s:
        return TopoType(STABLE_NODE, "D1")
    return TopoType(SADDLE_POINT, "D2")


def _tag_from_multipliers(ms: model.MultiplierSet) -> str:
    moduli = [abs(ms.t1), abs(ms.t2), abs(ms.mu_real)]
    if any(_close(m, 1.0) for m in moduli):
        return NON_HYPERBOLIC
    n_out = sum(m > 1.0 for m in moduli)
    focus = ms.is_complex_pair
    if n_out == 0:
        return STABLE_FOCUS_NODE if focus else STABLE_NODE
    if n_out == 3:
        return UNSTABLE_FOCUS_NODE if focus else UNSTABLE_NODE
    return SADDLE_FOCUS if focus else SADDLE_POINT


def classify_E2(p: Params) -> TopoType:
    """Table-2 classification of the endemic point.

    Raises DomainError when E2 does not exist (alpha <= beta + r).  The
    case label is resolved by the regime of r against Psi1 and the
    position of alpha against the thresholds; the stability tag itself
    comes straight from the multiplier moduli, so tag and label cannot
    disagree.
    """
    s = p.beta + p.r
    if p.alpha <= s or _close(p.alpha, s):
        raise DomainError(
            f"endemic point absent: alpha={p.alpha} <= beta+r={s}"
        )
    th = thresholds(p.beta, p.r)
    ms = model.multipliers_E2(p)

    # r-regime against Psi1 decides which row of the table applies.
    if _close(p.r, th.psi1):
        regime = "eq"
    elif p.r < th.psi1:
        regime = "lo"
    else:
        regime = "hi"

    # Bifurcation boundaries first (they carve the alpha axis).
    if th.psi2 is not None and _close(p.alpha, th.psi2):
        if regime == "lo":
            return TopoType(NON_HYPERBOLIC, "L11", nearby=("D12", "D31"))
        if regime == "eq":
            return TopoType(NON_HYPERBOLIC, "L12", nearby=("D22", "D32"))
        return TopoType(NON_HYPERBOLIC, "L13", nearby=("D33", "D34"))
    if regime == "hi" and th.psi3 is not None and _close(p.alpha, th.psi3):
        return TopoType(NON_HYPERBOLIC, "L2", nearby=("D23", "D4"))

    tag = _tag_from_multipliers(ms)
    label = _e2_case_label(p, th, ms, regime, tag)
    return TopoType(tag, label)


def _e2_case_label(p, th, ms, regime, tag) -> str:
    al = p.alpha
    if tag == NON_HYPERBOLIC:
        # A multiplier modulus grazed 1 away from the catalogued loci
        # (possible only in the extended domain or at the existence
        # boundary); report the locus-free label.
        return "boundary"
    if regime == "lo":
        if tag == STABLE_NODE:
            return "D11" if al <= th.upsilon1 + BOUNDARY_TOL else "D12"
        if tag == STABLE_FOCUS_NODE:
            return "D21"
        if tag == SADDLE_POINT:
            return "D31"
    elif regime == "eq":
        if tag == STABLE_NODE:
            return "D13"
        if tag == STABLE_FOCUS_NODE:
            return "D22"
        if tag == SADDLE_POINT:
            return "D32"
    else:
        if tag == STABLE_NODE:
            return "D14"
        if tag == STABLE_FOCUS_NODE:
            return "D23"
        if tag == SADDLE_FOCUS:
            return "D4"
        if tag == SADDLE_POINT:
            if th.psi2 is not None and al > th.psi2:
                return "D34"
            return "D33"
    # Outside the table (unstable cases, extended domain): keep the tag
    # visible rather than inventing a region code.
    return "untabulated"


def classify_all(p: Params) -> dict[str, str]:
    """Labels for both fixed points, CLI-friendly.

    E1 labels look like ``D1_stable_node``; E2 is ``nonexistent`` when
    alpha <= beta + r.
    """
    out = {}
    t1 = classify_E1(p)
    out["E1"] = f"{t1.case_label}_{_snake(t1.tag)}"
    try:
        t2 = classify_E2(p)
        out["E2"] = f"{t2.case_label}_{_snake(t2.tag)}"
    except DomainError:
        out["E2"] = "nonexistent"
    return out


def _snake(tag: str) -> str:
    parts = []
    for ch in tag:
        if ch.isupper() and parts:
            parts.append("_")
        parts.append(ch.lower())
    return "".join(parts)
