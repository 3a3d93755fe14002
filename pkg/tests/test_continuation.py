"""Branch continuation and the codimension-two event scan."""

from __future__ import annotations

import numpy as np
import pytest

from sirmap.classify import thresholds
from sirmap.continuation import (
    StepControl,
    continue_fixed_points,
    continue_ns_curve,
    transcritical_branch_tangent,
)
from sirmap.continuation import test_functions as branch_test_functions
from sirmap.errors import DomainError
from sirmap.model import Params, endemic_point
from sirmap.normalforms.codim2 import resonance_point


class TestFixedPointBranch:
    def test_branch_point_on_disease_free_branch(self):
        p0 = Params(N=0.51, beta=0.31, r=0.27, alpha=0.4)
        curve = continue_fixed_points(p0, (0.51, 0.0, 0.0), "alpha", (0.4, 0.9))
        bp = [e for e in curve.events if e.kind == "BP"]
        assert len(bp) == 1
        # the crossing sits exactly at alpha = beta + r
        assert bp[0].param_value == pytest.approx(0.58, abs=1e-8)
        assert bp[0].state == pytest.approx((0.51, 0.0, 0.0), abs=1e-10)

    def test_stop_at_halts_the_trace(self):
        p0 = Params(N=0.51, beta=0.31, r=0.27, alpha=0.4)
        curve = continue_fixed_points(
            p0, (0.51, 0.0, 0.0), "alpha", (0.4, 0.9), stop_at=("BP",)
        )
        assert curve.events[-1].kind == "BP"
        assert any("halted" in n for n in curve.notes)
        assert curve.points[-1].param_value < 0.9

    def test_flip_event_matches_threshold(self):
        p0 = Params(N=0.72, beta=0.52, r=0.21, alpha=3.0)
        curve = continue_fixed_points(p0, endemic_point(p0), "alpha", (3.0, 4.5))
        pd = [e for e in curve.events if e.kind == "PD"]
        assert len(pd) == 1
        want = thresholds(0.52, 0.21).psi2
        assert pd[0].param_value == pytest.approx(want, abs=1e-8)
        assert pd[0].residual < 1e-9

    def test_circle_birth_event_matches_threshold(self):
        p0 = Params(N=3.72, beta=0.52, r=0.81, alpha=4.5)
        curve = continue_fixed_points(p0, endemic_point(p0), "alpha", (4.5, 5.6))
        ns = [e for e in curve.events if e.kind == "NS"]
        assert len(ns) == 1
        want = thresholds(0.52, 0.81).psi3
        assert ns[0].param_value == pytest.approx(want, abs=1e-8)
        assert "neutral" not in ns[0].note

    def test_neutral_saddle_is_flagged_not_hidden(self):
        # det(A2) = 1 with a real multiplier pair is not a circle
        # birth; the event is still reported, with the note saying why.
        p0 = Params(N=1.0, beta=0.9, r=0.2, alpha=10.0)
        curve = continue_fixed_points(p0, endemic_point(p0), "alpha", (10.0, 13.0))
        ns = [e for e in curve.events if e.kind == "NS"]
        assert len(ns) == 1
        assert ns[0].param_value == pytest.approx(12.1, abs=1e-8)
        assert "neutral saddle" in ns[0].note

    def test_interior_points_are_converged_fixed_points(self):
        from sirmap.model import map_step

        p0 = Params(N=0.72, beta=0.52, r=0.21, alpha=3.0)
        curve = continue_fixed_points(p0, endemic_point(p0), "alpha", (3.0, 4.5))
        assert len(curve.points) > 30
        for pt in curve.points[:: max(1, len(curve.points) // 20)]:
            p = Params(N=0.72, beta=0.52, r=0.21, alpha=pt.param_value)
            image = map_step(p, pt.state)
            assert np.abs(np.array(image) - np.array(pt.state)).max() < 1e-9

    def test_branch_switch_lands_on_endemic_branch(self):
        # Trace the disease-free branch to its BP, step along the
        # analytic crossing tangent, and confirm the re-anchored trace
        # follows the endemic family.
        base = dict(N=0.51, beta=0.31, r=0.27)
        dfree = continue_fixed_points(
            Params(alpha=0.4, **base), (0.51, 0.0, 0.0), "alpha", (0.4, 0.9),
            stop_at=("BP",),
        )
        bp = dfree.events[0]
        tang = transcritical_branch_tangent(Params(alpha=bp.param_value, **base))
        ds = 0.05
        seed = tuple(np.array(bp.state) + ds * tang[:3])
        alpha1 = bp.param_value + ds * tang[3]
        endem = continue_fixed_points(
            Params(alpha=alpha1, **base), seed, "alpha", (alpha1, 0.9)
        )
        final = endem.points[-1]
        want = endemic_point(Params(alpha=final.param_value, **base))
        assert final.state == pytest.approx(want, abs=1e-3 * want[1])

    def test_tangent_is_unit_and_descends_in_x(self):
        t = transcritical_branch_tangent(Params(N=0.51, beta=0.31, r=0.27, alpha=0.58))
        assert np.linalg.norm(t) == pytest.approx(1.0, rel=1e-14)
        assert t[0] < 0 < t[1]

    def test_bad_active_param(self):
        p0 = Params(N=0.72, beta=0.52, r=0.21, alpha=3.0)
        with pytest.raises(DomainError):
            continue_fixed_points(p0, endemic_point(p0), "gamma", (3.0, 4.5))

    def test_start_outside_range(self):
        p0 = Params(N=0.72, beta=0.52, r=0.21, alpha=3.0)
        with pytest.raises(DomainError):
            continue_fixed_points(p0, endemic_point(p0), "alpha", (3.5, 4.5))

    def test_test_functions_have_documented_signs(self):
        # Below the flip threshold the PD function is positive, above
        # it negative; the zero crossing is what bisection locates.
        base = dict(N=0.72, beta=0.52, r=0.21)
        psi2 = thresholds(0.52, 0.21).psi2
        lo = Params(alpha=psi2 - 0.1, **base)
        hi = Params(alpha=psi2 + 0.1, **base)
        f_lo = branch_test_functions(lo, endemic_point(lo))
        f_hi = branch_test_functions(hi, endemic_point(hi))
        assert f_lo["PD"] * f_hi["PD"] < 0


class TestNSCurve:
    def test_event_pins(self):
        ns = continue_ns_curve(1.25, 0.32, (0.7, 3.0), n_points=400)
        got = {e.kind: e.param_value for e in ns.events}
        assert got.keys() == {"R2", "R3", "R4", "CH"}
        assert got["R2"] == pytest.approx(0.766957, abs=1e-4)
        assert got["R3"] == pytest.approx(0.799403, abs=1e-4)
        assert got["R4"] == pytest.approx(0.870476, abs=1e-4)
        assert got["CH"] == pytest.approx(2.805, abs=1e-4)

    def test_events_match_closed_forms_tightly(self):
        ns = continue_ns_curve(1.25, 0.32, (0.7, 3.0), n_points=400)
        for e in ns.events:
            pt = resonance_point(0.32, e.kind)
            assert e.param_value == pytest.approx(pt.r_star, abs=1e-9), e.kind

    def test_events_come_in_locus_order(self):
        ns = continue_ns_curve(1.25, 0.32, (0.7, 3.0), n_points=400)
        values = [e.param_value for e in ns.events]
        assert values == sorted(values)

    def test_implicit_check_gap_is_tiny(self):
        ns = continue_ns_curve(1.25, 0.32, (0.7, 3.0), n_points=200)
        assert ns.max_implicit_gap < 1e-8
        assert all(pt.implicit_gap < 1e-8 for pt in ns.points)

    def test_pole_split_is_noted(self):
        ns = continue_ns_curve(1.25, 0.32, (0.5, 0.9), n_points=100)
        assert any("pole" in note for note in ns.notes)

    def test_reversed_range_accepted(self):
        a = continue_ns_curve(1.25, 0.32, (0.7, 0.9), n_points=50)
        b = continue_ns_curve(1.25, 0.32, (0.9, 0.7), n_points=50)
        assert [p.r for p in a.points] == [p.r for p in b.points]

    def test_theta_missing_exactly_on_real_multiplier_stretch(self):
        # Below the R2 crossing the multipliers on the locus are real,
        # so there is no rotation angle to report.
        ns = continue_ns_curve(1.25, 0.32, (0.72, 0.82), n_points=100)
        r2 = resonance_point(0.32, "R2").r_star
        for pt in ns.points:
            assert (pt.theta is None) == (pt.r < r2), pt.r

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            continue_ns_curve(1.25, 1.2, (0.7, 0.9))
        with pytest.raises(DomainError):
            continue_ns_curve(1.25, 0.32, (-0.1, 0.9))


class TestStepControl:
    def test_small_max_step_gives_denser_curves(self):
        p0 = Params(N=0.72, beta=0.52, r=0.21, alpha=3.0)
        coarse = continue_fixed_points(
            p0, endemic_point(p0), "alpha", (3.0, 3.5),
            step_control=StepControl(initial=1e-2, max_step=2e-2),
        )
        fine = continue_fixed_points(
            p0, endemic_point(p0), "alpha", (3.0, 3.5),
            step_control=StepControl(initial=1e-3, max_step=2e-3),
        )
        assert len(fine.points) > 2 * len(coarse.points)
