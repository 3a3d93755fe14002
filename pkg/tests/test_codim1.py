"""Codimension-one coefficient formulas against independent oracles.

Pinned values were frozen from the numeric center-manifold reduction
(`sirmap.reduction`), which computes the same quantities from the map
itself without touching the closed forms under test.
"""

from __future__ import annotations

import numpy as np
import pytest

from conftest import random_params
from sirmap.classify import thresholds
from sirmap.errors import DomainError, SingularityError
from sirmap.model import Params, multipliers_E2
from sirmap.normalforms.codim1 import (
    first_lyapunov_A,
    flip_coefficients,
    flip_theta1,
    flip_theta2,
    ns_excluded_r,
    ns_first_lyapunov,
    ns_transversality,
    transcritical_nondegeneracy,
)
from sirmap.reduction import numeric_ns_coefficient, numeric_pd_coefficient


def _ns_alpha(beta: float, r: float) -> float:
    s = beta + r
    return s * s / (s - 1.0)


class TestFlip:
    def test_theta_pins(self):
        assert flip_theta1(0.52, 0.21) == pytest.approx(-0.7871437849363873, rel=1e-12)
        assert flip_theta2(0.72, 0.52, 0.21) == pytest.approx(2344.4687443400967, rel=1e-12)

    def test_theta1_is_multiplier_slope(self):
        # Theta1 equals d t_minus / d alpha on the flip locus, so a
        # centered difference of the exact multiplier must reproduce it.
        beta, r = 0.52, 0.21
        alpha_star = thresholds(beta, r).psi2
        h = 1e-6
        ts = []
        for da in (-h, h):
            p = Params(N=0.72, beta=beta, r=r, alpha=alpha_star + da)
            ms = multipliers_E2(p)
            t_minus = min(complex(ms.t1).real, complex(ms.t2).real)
            ts.append(t_minus)
        slope = (ts[1] - ts[0]) / (2 * h)
        assert slope == pytest.approx(flip_theta1(beta, r), rel=1e-5)

    def test_criticality_follows_theta2_sign(self):
        rep = flip_coefficients(0.72, 0.52, 0.21)
        assert rep.kind == "Flip"
        assert rep.criticality == "Supercritical"
        assert rep.all_checks_pass

    def test_numeric_flip_coefficient_agrees_in_sign(self):
        beta, r = 0.52, 0.21
        p = Params(N=0.72, beta=beta, r=r, alpha=thresholds(beta, r).psi2)
        e0 = numeric_pd_coefficient(p)
        assert (e0 > 0) == (flip_theta2(0.72, beta, r) > 0)

    def test_high_regime_reports_aliases(self):
        # Above the first threshold the same numbers travel under the
        # theta3/theta4 names; the report carries both spellings.
        beta = 0.32
        r = 0.8
        assert r > thresholds(beta, r).psi1
        rep = flip_coefficients(1.0, beta, r)
        assert rep.coefficients["theta3"] == rep.coefficients["theta1"]
        assert rep.coefficients["theta4"] == rep.coefficients["theta2"]
        assert rep.notes

    def test_rejects_bad_domain(self):
        with pytest.raises(DomainError):
            flip_coefficients(1.0, 1.2, 0.3)
        with pytest.raises(DomainError):
            flip_coefficients(1.0, 0.5, 1.5)


class TestNeimarkSacker:
    def test_lyapunov_pins(self):
        assert first_lyapunov_A(3.72, 0.52, 0.81) == pytest.approx(
            0.026413814687260218, rel=1e-12
        )
        assert first_lyapunov_A(10.0, 0.9, 0.4311216871) == pytest.approx(
            -0.002346818434454629, rel=1e-12
        )
        assert first_lyapunov_A(1.25, 0.32, 0.7983) == pytest.approx(
            0.6791582349020324, rel=1e-12
        )

    def test_matches_numeric_normal_form_on_locus(self, rng):
        done = 0
        while done < 8:
            N = float(rng.uniform(0.5, 10.0))
            beta = float(rng.uniform(0.05, 0.95))
            r = float(rng.uniform(1.05 - beta, 2.4 - beta))
            if not 0 < r:
                continue
            bad = ns_excluded_r(beta)
            if min(abs(r - v) for v in bad.values()) < 1e-3:
                continue
            p = Params(N=N, beta=beta, r=r, alpha=_ns_alpha(beta, r))
            if multipliers_E2(p).delta >= 0:
                # neutral-saddle stretch of the |t| = 1 locus
                continue
            want = first_lyapunov_A(N, beta, r)
            assert numeric_ns_coefficient(p) == pytest.approx(want, rel=1e-6)
            done += 1

    def test_criticality_convention(self):
        sub = ns_first_lyapunov(3.72, 0.52, 0.81)
        assert sub.criticality == "Subcritical"
        sup = ns_first_lyapunov(10.0, 0.9, 0.4311216871)
        assert sup.criticality == "Supercritical"

    def test_excluded_r_checks_fail_near_resonance(self):
        beta = 0.32
        r3 = ns_excluded_r(beta)["r3_resonance"]
        rep = ns_first_lyapunov(1.25, beta, r3)
        assert not rep.check("r_clear_of_r3_resonance").passed
        clear = ns_first_lyapunov(1.25, beta, 0.7983)
        assert clear.check("r_clear_of_r3_resonance").passed

    def test_pole_raises(self):
        with pytest.raises(SingularityError):
            first_lyapunov_A(1.0, 0.4, 0.6)

    def test_transversality(self):
        assert ns_transversality(0.52, 0.81) == pytest.approx(0.06451127819548873, rel=1e-12)
        # closed form beta (beta + r - 1) / (2 (beta + r))
        beta, r = 0.3, 0.9
        want = beta * (beta + r - 1.0) / (2.0 * (beta + r))
        assert ns_transversality(beta, r) == pytest.approx(want, rel=1e-14)

    def test_transversality_numeric(self):
        # |t1| crosses 1 at alpha = Psi3 with the stated slope.
        beta, r = 0.52, 0.81
        alpha_star = _ns_alpha(beta, r)
        h = 1e-6
        mods = []
        for da in (-h, h):
            p = Params(N=3.72, beta=beta, r=r, alpha=alpha_star + da)
            mods.append(abs(complex(multipliers_E2(p).t1)))
        slope = (mods[1] - mods[0]) / (2 * h)
        assert slope == pytest.approx(ns_transversality(beta, r), rel=1e-4)


class TestTranscritical:
    def test_report_at_example_point(self):
        rep = transcritical_nondegeneracy(Params(N=0.51, beta=0.31, r=0.27, alpha=0.58))
        assert rep.kind == "Transcritical"
        assert rep.coefficients["quadratic"] == pytest.approx(-4.885984023238926, rel=1e-9)
        assert rep.all_checks_pass

    def test_rejects_off_locus(self):
        with pytest.raises(DomainError):
            transcritical_nondegeneracy(Params(N=0.51, beta=0.31, r=0.27, alpha=0.9))

    def test_quadratic_coefficient_scales_inversely_with_population(self, rng):
        # quadratic = -(beta + r)^2/(r N beta) * r ... overall ~ 1/N:
        # doubling N must halve it.
        for p in random_params(rng, 5, endemic=False):
            q1 = transcritical_nondegeneracy(
                Params(N=p.N, beta=p.beta, r=p.r, alpha=p.beta + p.r)
            ).coefficients["quadratic"]
            q2 = transcritical_nondegeneracy(
                Params(N=2 * p.N, beta=p.beta, r=p.r, alpha=p.beta + p.r)
            ).coefficients["quadratic"]
            assert q2 == pytest.approx(q1 / 2.0, rel=1e-10)
