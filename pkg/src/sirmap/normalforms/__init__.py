"""Closed-form bifurcation coefficients, resonance points, and tongues."""

from .codim1 import (
    first_lyapunov_A,
    flip_coefficients,
    flip_theta1,
    flip_theta2,
    ns_excluded_r,
    ns_first_lyapunov,
    ns_transversality,
    transcritical_nondegeneracy,
)
from .codim2 import (
    HOMOCLINIC_KINDS,
    RESONANCE_KINDS,
    CurveTangent,
    ResonancePoint,
    chenciner_L2,
    chenciner_multiplier,
    chenciner_region,
    homoclinic_curve_tangent,
    resonance13_coefficients,
    resonance14_coefficients,
    resonance_point,
)
from .report import (
    DEGENERATE,
    SUBCRITICAL,
    SUPERCRITICAL,
    Check,
    NormalFormReport,
)
from .tongues import TongueSpec, arnold_tongue, numeric_sigma_abs, tongue_apex

__all__ = [
    "Check",
    "CurveTangent",
    "DEGENERATE",
    "HOMOCLINIC_KINDS",
    "NormalFormReport",
    "RESONANCE_KINDS",
    "ResonancePoint",
    "SUBCRITICAL",
    "SUPERCRITICAL",
    "TongueSpec",
    "arnold_tongue",
    "chenciner_L2",
    "chenciner_multiplier",
    "chenciner_region",
    "first_lyapunov_A",
    "flip_coefficients",
    "flip_theta1",
    "flip_theta2",
    "homoclinic_curve_tangent",
    "ns_excluded_r",
    "ns_first_lyapunov",
    "ns_transversality",
    "numeric_sigma_abs",
    "resonance13_coefficients",
    "resonance14_coefficients",
    "resonance_point",
    "tongue_apex",
    "transcritical_nondegeneracy",
]
