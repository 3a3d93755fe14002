"""Report container shared by all bifurcation-coefficient operations."""

from __future__ import annotations

from dataclasses import dataclass, field

SUPERCRITICAL = "Supercritical"
SUBCRITICAL = "Subcritical"
DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class Check:
    """One non-degeneracy or transversality condition."""

    name: str
    value: float
    passed: bool


@dataclass(frozen=True)
class NormalFormReport:
    """Outcome of a normal-form computation.

    ``kind`` is one of Transcritical, Flip, NeimarkSacker, Chenciner,
    R2, R3, R4, ArnoldTongue.  ``coefficients`` maps coefficient names
    to real or complex values.  ``criticality`` follows the theorem
    conventions where one exists (flip: Theta2 > 0 supercritical;
    Neimark-Sacker: A < 0 supercritical); kinds without a published
    criticality notion use the sign of their deciding coefficient with
    the NS convention, noted per operation.
    """

    kind: str
    coefficients: dict[str, complex | float]
    criticality: str
    nondegeneracy_checks: tuple[Check, ...] = field(default_factory=tuple)
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def all_checks_pass(self) -> bool:
        return all(c.passed for c in self.nondegeneracy_checks)

    def check(self, name: str) -> Check:
        for c in self.nondegeneracy_checks:
            if c.name == name:
                return c
        raise KeyError(name)
