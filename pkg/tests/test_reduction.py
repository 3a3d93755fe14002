"""Series engine and reduction machinery.

The normal-form engine gets a ground-truth workout: a map whose normal
form is known exactly (a rotation with prescribed resonant corrections)
is hidden behind a random near-identity change of coordinates, and the
engine has to dig the prescribed coefficients back out.
"""

from __future__ import annotations

import cmath

import numpy as np
import pytest

from conftest import FLIP, random_params
from sirmap.errors import DomainError, SmallDivisorError
from sirmap.model import Params, endemic_point, map_step, planar_block_E2
from sirmap.normalforms.codim1 import first_lyapunov_A, flip_theta2
from sirmap.reduction import (
    center_manifold_E1,
    fit_center_manifold_E1,
    is_resonant,
    normal_form,
    numeric_ns_coefficient,
    numeric_pd_coefficient,
    reduce_planar,
    series_compose,
    series_invert,
)

# Rotation angle far from every root of unity of order <= 6: the golden
# mean in turns.  All small divisors through order 5 stay above 0.5.
GOLDEN_TURNS = 0.3819660112501051


def _benchmark(mu0: complex, a: float, b: float, c: float) -> dict:
    """Series of z -> mu0*z*exp(i(a|z|^2 + b|z|^4))*(1 + c|z|^4)."""
    return {
        (1, 0): mu0,
        (2, 1): mu0 * 1j * a,
        (3, 2): mu0 * (1j * b - a * a / 2.0 + c),
    }


def _random_nonresonant_h(rng: np.random.Generator) -> dict:
    """Near-identity series with junk in every non-resonant slot."""
    h: dict = {(1, 0): 1.0 + 0.0j}
    for j in range(0, 6):
        for k in range(0, 6):
            if 2 <= j + k <= 5 and j - k != 1:
                re, im = rng.uniform(-0.5, 0.5, size=2)
                h[(j, k)] = complex(re, im)
    return h


def _conjugate(series: dict, h: dict, order: int) -> dict:
    inner = series_compose(series, h, order)
    return series_compose(series_invert(h, order), inner, order)


class TestNormalFormGroundTruth:
    def test_cubic_coefficient_is_conjugation_invariant(self, rng):
        mu0 = cmath.exp(2j * cmath.pi * GOLDEN_TURNS)
        target = _benchmark(mu0, a=0.37, b=-0.81, c=0.24)
        disguised = _conjugate(target, _random_nonresonant_h(rng), order=5)
        nf = normal_form(disguised, 5)
        assert nf[(1, 0)] == pytest.approx(mu0, abs=1e-12)
        assert nf[(2, 1)] == pytest.approx(target[(2, 1)], abs=1e-10)
        junk = {k: v for k, v in nf.items() if k[0] - k[1] != 1}
        assert all(abs(v) < 1e-10 for v in junk.values()), junk

    def test_quintic_coefficient_recovered_when_cubic_vanishes(self, rng):
        # The order-5 resonant slot is only a conjugation invariant on
        # the zero locus of the order-3 one, so the ground-truth check
        # for it uses a = 0.
        mu0 = cmath.exp(2j * cmath.pi * GOLDEN_TURNS)
        target = _benchmark(mu0, a=0.0, b=-0.81, c=0.24)
        disguised = _conjugate(target, _random_nonresonant_h(rng), order=5)
        nf = normal_form(disguised, 5)
        assert nf[(2, 1)] == pytest.approx(0.0, abs=1e-12)
        assert nf[(3, 2)] == pytest.approx(target[(3, 2)], abs=1e-10)

    def test_already_normal_is_fixed_point(self):
        mu0 = cmath.exp(2j * cmath.pi * GOLDEN_TURNS)
        target = _benchmark(mu0, a=-0.2, b=0.05, c=1.3)
        nf = normal_form(target, 5)
        assert nf == pytest.approx(target)

    def test_scaling_covariance(self, rng):
        # z = sigma*w multiplies the (j,k) coefficient by
        # sigma^(j-1) * conj(sigma)^k, so the resonant slots pick up
        # |sigma|^2 and |sigma|^4.
        mu0 = cmath.exp(2j * cmath.pi * GOLDEN_TURNS)
        target = _benchmark(mu0, a=0.37, b=-0.81, c=0.24)
        disguised = _conjugate(target, _random_nonresonant_h(rng), order=5)
        sigma = 0.7 - 0.4j
        scaled = {
            (j, k): v * sigma ** (j - 1) * sigma.conjugate() ** k
            for (j, k), v in disguised.items()
        }
        nf_plain = normal_form(disguised, 5)
        nf_scaled = normal_form(scaled, 5)
        s2 = abs(sigma) ** 2
        assert nf_scaled[(2, 1)] == pytest.approx(nf_plain[(2, 1)] * s2, rel=1e-9)
        assert nf_scaled[(3, 2)] == pytest.approx(nf_plain[(3, 2)] * s2 * s2, rel=1e-9)

    def test_small_divisor_raises_without_declared_resonance(self):
        mu0 = cmath.exp(2j * cmath.pi / 3.0)
        series = {(1, 0): mu0, (0, 2): 1.0 + 0.0j}
        with pytest.raises(SmallDivisorError):
            normal_form(series, 2)

    def test_declared_resonance_keeps_the_slot(self):
        mu0 = cmath.exp(2j * cmath.pi / 3.0)
        series = {(1, 0): mu0, (0, 2): 1.0 + 0.0j}
        nf = normal_form(series, 2, m=3)
        assert nf[(0, 2)] == pytest.approx(1.0 + 0.0j)

    def test_resonance_predicate(self):
        assert is_resonant(2, 1, None)
        assert not is_resonant(2, 0, None)
        assert is_resonant(0, 2, 3)
        assert is_resonant(0, 3, 4)
        assert not is_resonant(0, 3, 3)


class TestPlanarReduction:
    def test_step_matches_full_map_exactly(self, rng):
        # The (x, y) subsystem is closed and exactly quadratic, so the
        # reduced step must agree with the full map to roundoff even
        # for large deviations.
        for p in random_params(rng, 25):
            red = reduce_planar(p)
            e2 = np.array(endemic_point(p))
            u = rng.uniform(-0.3, 0.3, size=2) * p.N
            full = map_step(p, (e2[0] + u[0], e2[1] + u[1], e2[2]))
            got = red.step(u)
            want = np.array([full[0] - e2[0], full[1] - e2[1]])
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12 * p.N)

    def test_truncated_step_is_linear(self, rng):
        p = Params(N=2.0, beta=0.3, r=0.4, alpha=1.9)
        red = reduce_planar(p)
        u = np.array([0.05, -0.03])
        assert red.step_truncated(u, 1) == pytest.approx(red.linear @ u)

    def test_injection_satisfies_linear_slaving(self, rng):
        # The z-slaving row phi solves phi(A2 u) = (1-beta) phi(u) + r*v.
        for p in random_params(rng, 10):
            red = reduce_planar(p)
            s12 = red.injection[2]
            a2 = planar_block_E2(p)
            u = rng.uniform(-1.0, 1.0, size=2)
            lhs = s12 @ (a2 @ u)
            rhs = (1.0 - p.beta) * (s12 @ u) + p.r * u[1]
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


class TestNumericCoefficients:
    def test_ns_coefficient_matches_closed_form(self):
        # Points on the invariant-circle birth locus, beta + r > 1.
        for N, beta, r in [(3.72, 0.52, 0.81), (1.25, 0.32, 0.7983), (10.0, 0.9, 0.43)]:
            s = beta + r
            alpha = s * s / (s - 1.0)
            p = Params(N=N, beta=beta, r=r, alpha=alpha)
            want = first_lyapunov_A(N, beta, r)
            got = numeric_ns_coefficient(p)
            assert got == pytest.approx(want, rel=1e-6)

    def test_pd_coefficient_sign_at_flip(self):
        from sirmap.classify import thresholds

        th = thresholds(FLIP.beta, FLIP.r)
        p = Params(N=FLIP.N, beta=FLIP.beta, r=FLIP.r, alpha=th.psi2)
        e0 = numeric_pd_coefficient(p)
        theta2 = flip_theta2(FLIP.N, FLIP.beta, FLIP.r)
        assert e0 != 0.0
        assert (e0 > 0) == (theta2 > 0)

    def test_pd_coefficient_rejects_off_locus(self):
        with pytest.raises(DomainError):
            numeric_pd_coefficient(Params(N=0.72, beta=0.52, r=0.21, alpha=3.0))


class TestCenterManifoldE1:
    POINT = Params(N=0.51, beta=0.31, r=0.27, alpha=0.58)

    def test_quadratic_coefficients_closed_form(self):
        cm = center_manifold_E1(self.POINT)
        p = self.POINT
        want = (p.beta + p.r) ** 2 / (p.r * p.N * p.beta)
        assert cm.d["d11"] == pytest.approx(want, rel=1e-12)
        assert cm.d["d12"] == 0.0
        assert cm.d["d13"] == 0.0

    def test_reduced_map_quadratic_coefficient(self):
        cm = center_manifold_E1(self.POINT)
        assert cm.quadratic_coefficient == pytest.approx(-4.885984023238926, rel=1e-9)

    def test_second_point_matches_closed_form(self):
        p = Params(N=2.0, beta=0.45, r=0.3, alpha=0.75)
        cm = center_manifold_E1(p)
        assert cm.d["d11"] == pytest.approx(0.5625 / 0.27, rel=1e-12)

    def test_fit_agrees_with_analytic(self):
        fit = fit_center_manifold_E1(self.POINT)
        cm = center_manifold_E1(self.POINT)
        assert fit["d11"] == pytest.approx(cm.d["d11"], abs=1e-6)
        assert abs(fit["d12"]) < 1e-6
        assert abs(fit["d13"]) < 1e-6

    def test_fit_rejects_off_locus(self):
        with pytest.raises(DomainError):
            fit_center_manifold_E1(Params(N=0.51, beta=0.31, r=0.27, alpha=0.6))
