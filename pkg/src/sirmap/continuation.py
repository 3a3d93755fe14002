"""Predictor-corrector continuation and codim-2 event location.

Fixed-point branches are traced by pseudo-arclength continuation in
(state, parameter) space with an analytic Jacobian (the map is
quadratic, so every derivative is exact).  The three classical test
functions are monitored along the way:

    BP:  det(J - I)       branch point / transcritical crossing
    PD:  det(J + I)       flip
    NS:  det(A) - 1       planar multiplier product through 1

where A is the (x, y) block of J; its determinant equals t1*t2 because
the third direction decouples.  The Neimark-Sacker curve itself is a
closed-form graph alpha = Psi3(beta, r), so the two-parameter trace
runs that graph and re-solves each point with a generic Newton system
as a consistency check, locating R1/R2/R3/R4/CH events by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import classify, model, reduction
from .errors import ConvergenceError, DomainError, SingularityError
from .model import Params, State3
from .normalforms import codim1, codim2
from .normalforms.report import Check, NormalFormReport

_ACTIVE_PARAMS = ("alpha", "beta", "r", "N")


# ---------------------------------------------------------------------------
# curve/event containers


@dataclass(frozen=True)
class CurvePoint:
    state: State3
    param_value: float
    multipliers: tuple[complex, complex, complex]
    test_values: dict[str, float]


@dataclass(frozen=True)
class ContinuationEvent:
    kind: str
    param_value: float
    state: State3
    residual: float
    note: str = ""


@dataclass(frozen=True)
class ContinuationCurve:
    active_param: str
    points: list[CurvePoint]
    events: list[ContinuationEvent]
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class StepControl:
    """Arclength step policy, as fractions of the parameter scale."""

    initial: float = 2e-3
    min_step: float = 1e-6
    max_step: float = 1e-2
    max_newton: int = 12
    tol: float = 1e-10


# ---------------------------------------------------------------------------
# analytic pieces


def _param_derivative(p: Params, s: State3, name: str) -> np.ndarray:
    """d(map_step)/d(parameter) at fixed state; exact."""
    x, y, _z = s
    if name == "alpha":
        return np.array([-x * y / p.N, x * y / p.N, 0.0])
    if name == "beta":
        return np.array([p.N - x, -y, -_z])
    if name == "r":
        return np.array([0.0, -y, y])
    if name == "N":
        return np.array([p.alpha * x * y / p.N**2 + p.beta, -p.alpha * x * y / p.N**2, 0.0])
    raise DomainError(f"unknown active parameter {name!r}")


def _planar_det(p: Params, s: State3) -> float:
    j = model.jacobian_at(p, s)
    return float(j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0])


def test_functions(p: Params, s: State3) -> dict[str, float]:
    j = model.jacobian_at(p, s)
    eye = np.eye(3)
    return {
        "BP": float(np.linalg.det(j - eye)),
        "PD": float(np.linalg.det(j + eye)),
        "NS": float(j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]) - 1.0,
    }


def _newton_fixed_point(
    p: Params, s0: State3, tol: float, max_iter: int = 12
) -> Optional[State3]:
    """Plain Newton on F(s) - s = 0 at fixed parameters."""
    s = np.array(s0, dtype=float)
    scale = 1.0 + p.N
    for _ in range(max_iter):
        res = np.array(model.map_step(p, tuple(s))) - s
        if np.abs(res).max() < tol * scale:
            return tuple(s)
        jac = model.jacobian_at(p, tuple(s)) - np.eye(3)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        s = s + step
        if not np.all(np.isfinite(s)):
            return None
    res = np.array(model.map_step(p, tuple(s))) - s
    if np.abs(res).max() < tol * scale:
        return tuple(s)
    return None


def _extended_jacobian(p: Params, s: State3, active: str) -> np.ndarray:
    """3x4 matrix [J - I | dF/dparam] of the fixed-point system."""
    j = model.jacobian_at(p, s) - np.eye(3)
    col = _param_derivative(p, s, active).reshape(3, 1)
    return np.hstack([j, col])


def _tangent(p: Params, s: State3, active: str, prev: Optional[np.ndarray]) -> np.ndarray:
    ext = _extended_jacobian(p, s, active)
    _, _, vt = np.linalg.svd(ext)
    t = vt[-1]
    if prev is not None and float(prev @ t) < 0:
        t = -t
    return t / np.linalg.norm(t)


def transcritical_branch_tangent(p: Params) -> np.ndarray:
    """Tangent (dx, dy, dz, dalpha) of the endemic branch at the crossing.

    At alpha = beta + r the endemic branch passes through E1 with
    direction (-N/s, beta N/s^2, r N/s^2, 1), s = beta + r; useful for
    switching branches after a BP event on the disease-free branch.
    """
    s = p.beta + p.r
    t = np.array([-p.N / s, p.beta * p.N / s**2, p.r * p.N / s**2, 1.0])
    return t / np.linalg.norm(t)


# ---------------------------------------------------------------------------
# one-parameter fixed-point continuation


def continue_fixed_points(
    p0: Params,
    s0: State3,
    active_param: str,
    param_range: tuple[float, float],
    step_control: Optional[StepControl] = None,
    stop_at: Sequence[str] = (),
    max_points: int = 20_000,
) -> ContinuationCurve:
    """Trace a fixed-point branch from p0 toward param_range[1].

    Events (BP/PD/NS sign changes) are located by bisection in the
    active parameter to 1e-10 relative.  On corrector failure the step
    is halved; hitting the floor truncates the curve with a note.
    A kind listed in stop_at halts the trace once located, the way the
    published runs stop at their first branch point.
    """
    if active_param not in _ACTIVE_PARAMS:
        raise DomainError(f"unknown active parameter {active_param!r}")
    sc = step_control or StepControl()
    lo, hi = min(param_range), max(param_range)
    start = getattr(p0, active_param)
    if not lo <= start <= hi:
        raise DomainError(
            f"start value {active_param}={start} outside range [{lo}, {hi}]"
        )
    target = param_range[1]
    direction = 1.0 if target >= start else -1.0
    scale = max(1.0, abs(lo), abs(hi))

    s = _newton_fixed_point(p0, s0, sc.tol)
    if s is None:
        raise ConvergenceError(
            f"no fixed point near {s0} at {active_param}={start}"
        )
    points = [_make_point(p0, s, active_param)]
    events: list[ContinuationEvent] = []
    notes: list[str] = []

    u = np.array([*s, start])
    prev_tangent: Optional[np.ndarray] = None
    # make the very first tangent march in the requested direction
    t = _tangent(p0, s, active_param, None)
    if t[3] * direction < 0:
        t = -t
    prev_tangent = t
    h = sc.initial * scale

    while len(points) < max_points:
        lam = u[3]
        if (direction > 0 and lam >= target) or (direction < 0 and lam <= target):
            break
        p_here = replace(p0, **{active_param: float(lam)})
        t = _tangent(p_here, tuple(u[:3]), active_param, prev_tangent)
        accepted = False
        while h >= sc.min_step * scale:
            u_pred = u + h * t
            u_new = _arclength_corrector(
                p0, active_param, u_pred, t, sc
            )
            if u_new is not None and lo - 1e-12 <= u_new[3] <= hi + 1e-12:
                accepted = True
                break
            h *= 0.5
        if not accepted:
            notes.append(
                f"step floor reached at {active_param}={lam:.12g}; curve truncated"
            )
            break
        u = u_new
        prev_tangent = t
        p_new = replace(p0, **{active_param: float(u[3])})
        points.append(_make_point(p_new, tuple(u[:3]), active_param))
        h = min(h * 1.3, sc.max_step * scale)
        new_events = _bracketed_events(
            p0, active_param, points[-2], points[-1], sc
        )
        events.extend(new_events)
        if any(ev.kind in stop_at for ev in new_events):
            notes.append(f"halted at first {new_events[-1].kind} event")
            break
    if len(points) >= max_points:
        notes.append("max point budget reached")
    return ContinuationCurve(
        active_param=active_param,
        points=points,
        events=events,
        notes=tuple(notes),
    )


def _make_point(p: Params, s: State3, active: str) -> CurvePoint:
    eigs = np.linalg.eigvals(model.jacobian_at(p, s))
    eigs = tuple(sorted((complex(e) for e in eigs), key=lambda e: -abs(e)))
    return CurvePoint(
        state=s,
        param_value=getattr(p, active),
        multipliers=eigs,  # type: ignore[arg-type]
        test_values=test_functions(p, s),
    )


def _arclength_corrector(
    p0: Params,
    active: str,
    u_pred: np.ndarray,
    tangent: np.ndarray,
    sc: StepControl,
) -> Optional[np.ndarray]:
    u = u_pred.copy()
    scale = 1.0 + p0.N
    for _ in range(sc.max_newton):
        p_here = replace(p0, **{active: float(u[3])})
        s = tuple(u[:3])
        res_map = np.array(model.map_step(p_here, s)) - u[:3]
        res_arc = float(tangent @ (u - u_pred))
        res = np.array([*res_map, res_arc])
        if np.abs(res).max() < sc.tol * scale:
            return u
        jac = np.zeros((4, 4))
        jac[:3, :3] = model.jacobian_at(p_here, s) - np.eye(3)
        jac[:3, 3] = _param_derivative(p_here, s, active)
        jac[3, :] = tangent
        try:
            du = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        u = u + du
        if not np.all(np.isfinite(u)):
            return None
    p_here = replace(p0, **{active: float(u[3])})
    res_map = np.array(model.map_step(p_here, tuple(u[:3]))) - u[:3]
    if np.abs(res_map).max() < sc.tol * scale:
        return u
    return None


def _bracketed_events(
    p0: Params,
    active: str,
    a: CurvePoint,
    b: CurvePoint,
    sc: StepControl,
) -> list[ContinuationEvent]:
    found = []
    for name in ("BP", "PD", "NS"):
        fa, fb = a.test_values[name], b.test_values[name]
        if fa == 0.0:
            continue
        if fa * fb < 0:
            ev = _bisect_event(p0, active, name, a, b, sc)
            if ev is not None:
                found.append(ev)
    found.sort(key=lambda e: e.param_value)
    return found


def _bisect_event(
    p0: Params,
    active: str,
    name: str,
    a: CurvePoint,
    b: CurvePoint,
    sc: StepControl,
) -> Optional[ContinuationEvent]:
    la, lb = a.param_value, b.param_value
    sa_state, sb_state = np.array(a.state), np.array(b.state)
    fa = a.test_values[name]
    tol = 1e-10 * (1.0 + max(abs(la), abs(lb)))
    # test functions can have shallow slopes in the parameter, so solve
    # the interior fixed points well below the location tolerance
    newton_tol = min(sc.tol, 1e-13)
    state_mid: State3 = a.state
    while abs(lb - la) > tol:
        lm = 0.5 * (la + lb)
        w = (lm - a.param_value) / (b.param_value - a.param_value)
        seed = tuple((1 - w) * sa_state + w * sb_state)
        p_mid = replace(p0, **{active: lm})
        sol = _newton_fixed_point(p_mid, seed, newton_tol)
        if sol is None:
            sol = _newton_fixed_point(p_mid, seed, sc.tol)
        if sol is None:
            return None
        state_mid = sol
        fm = test_functions(p_mid, sol)[name]
        if fa * fm <= 0:
            lb = lm
            sb_state = np.array(sol)
        else:
            la = lm
            fa = fm
            sa_state = np.array(sol)
    lam = 0.5 * (la + lb)
    p_ev = replace(p0, **{active: lam})
    note = ""
    if name == "NS":
        p_full = p_ev
        try:
            if model.planar_discriminant(p_full) >= 0:
                note = "neutral saddle: real reciprocal multiplier pair"
        except Exception:  # pragma: no cover - diagnostics only
            pass
    return ContinuationEvent(
        kind=name,
        param_value=lam,
        state=state_mid,
        residual=abs(lb - la),
        note=note,
    )


# ---------------------------------------------------------------------------
# the Neimark-Sacker curve in (r, alpha)


@dataclass(frozen=True)
class NSCurvePoint:
    r: float
    alpha: float
    state: State3
    theta: Optional[float]
    lyapunov_A: Optional[float]
    implicit_gap: float


@dataclass(frozen=True)
class NSCurve:
    beta: float
    N: float
    points: list[NSCurvePoint]
    events: list[ContinuationEvent]
    max_implicit_gap: float
    notes: tuple[str, ...] = ()


def _ns_alpha(beta: float, r: float) -> Optional[float]:
    return classify.psi3(beta, r)


def _ns_point_params(N: float, beta: float, r: float) -> Optional[Params]:
    alpha = _ns_alpha(beta, r)
    if alpha is None or alpha <= 0:
        return None
    return Params(N=N, alpha=alpha, beta=beta, r=r)


def _theta_at(p: Params) -> Optional[float]:
    if model.planar_discriminant(p) >= 0:
        return None
    ms = model.multipliers_E2(p)
    t1 = complex(ms.t1)
    return math.atan2(t1.imag, t1.real)


def _lyapunov_at(N: float, beta: float, r: float) -> Optional[float]:
    try:
        return codim1.first_lyapunov_A(N, beta, r)
    except SingularityError:
        return None


def _generic_ns_refine(p: Params, tol: float = 1e-12, max_iter: int = 20) -> Optional[tuple[State3, float]]:
    """Newton on (fixed point, det(A)-1) in (x, y, z, alpha) at fixed r."""
    u = np.array([*model.endemic_point(p), p.alpha])
    scale = 1.0 + p.N
    for _ in range(max_iter):
        p_here = replace(p, alpha=float(u[3]))
        s = tuple(u[:3])
        res = np.empty(4)
        res[:3] = np.array(model.map_step(p_here, s)) - u[:3]
        res[3] = _planar_det(p_here, s) - 1.0
        if np.abs(res).max() < tol * scale:
            return tuple(u[:3]), float(u[3])
        jac = np.zeros((4, 4))
        jac[:3, :3] = model.jacobian_at(p_here, s) - np.eye(3)
        jac[:3, 3] = _param_derivative(p_here, s, "alpha")
        jac[3, :] = _planar_det_gradient(p_here, s)
        try:
            du = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        u = u + du
        if not np.all(np.isfinite(u)):
            return None
    return None


def _planar_det_gradient(p: Params, s: State3) -> np.ndarray:
    """Gradient of det(A(s; alpha)) wrt (x, y, z, alpha); exact."""
    x, y, _ = s
    aN = p.alpha / p.N
    a00 = 1.0 - aN * y - p.beta
    a01 = -aN * x
    a10 = aN * y
    a11 = 1.0 - p.beta - p.r + aN * x
    # partials of the four entries
    d_x = a00 * aN - (-aN) * a10  # a00*dA11/dx - dA01/dx*a10
    d_y = -aN * a11 - a01 * aN
    d_alpha = (
        (-y / p.N) * a11
        + a00 * (x / p.N)
        - (-x / p.N) * a10
        - a01 * (y / p.N)
    )
    return np.array([d_x, d_y, 0.0, d_alpha])


def continue_ns_curve(
    N: float,
    beta: float,
    r_range: tuple[float, float],
    n_points: int = 600,
) -> NSCurve:
    """Trace alpha = Psi3(beta, r) and locate its codim-2 events.

    Every grid point is re-solved by a generic Newton system in
    (state, alpha) as an independent check; the maximum gap between
    the two answers is reported on the curve.  The trace splits at the
    pole beta + r = 1, where alpha blows up.  Events: R2 (and R1) where
    the discriminant crosses zero, R3/R4 where the multiplier argument
    crosses 2pi/3 and pi/2, CH where the first Lyapunov quantity
    changes sign away from the pole.
    """
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    lo, hi = min(r_range), max(r_range)
    if lo <= 0:
        raise DomainError("r range must be positive")
    pole = 1.0 - beta
    grid = np.linspace(lo, hi, n_points)
    notes: list[str] = []
    if lo < pole < hi:
        notes.append(f"curve split at the pole r = 1 - beta = {pole:.12g}")
    points: list[NSCurvePoint] = []
    max_gap = 0.0
    for r in grid:
        p = _ns_point_params(N, beta, float(r))
        if p is None:
            continue
        refined = _generic_ns_refine(p)
        if refined is None:
            continue
        state, alpha_gen = refined
        gap = abs(alpha_gen - p.alpha)
        max_gap = max(max_gap, gap)
        points.append(
            NSCurvePoint(
                r=float(r),
                alpha=p.alpha,
                state=state,
                theta=_theta_at(p),
                lyapunov_A=_lyapunov_at(N, beta, float(r)),
                implicit_gap=gap,
            )
        )
    events = _ns_curve_events(N, beta, points)
    return NSCurve(
        beta=beta,
        N=N,
        points=points,
        events=events,
        max_implicit_gap=max_gap,
        notes=tuple(notes),
    )


def _ns_curve_events(
    N: float, beta: float, points: list[NSCurvePoint]
) -> list[ContinuationEvent]:
    events: list[ContinuationEvent] = []
    pole = 1.0 - beta

    def disc(r: float) -> float:
        p = _ns_point_params(N, beta, r)
        if p is None:
            raise SingularityError("discriminant test hit the pole")
        return model.planar_discriminant(p)

    def theta_gap(target: float) -> Callable[[float], float]:
        def fn(r: float) -> float:
            p = _ns_point_params(N, beta, r)
            if p is None:
                raise SingularityError("angle test hit the pole")
            th = _theta_at(p)
            if th is None:
                raise SingularityError("angle test outside the complex region")
            return th - target

        return fn

    def lyap(r: float) -> float:
        val = _lyapunov_at(N, beta, r)
        if val is None:
            raise SingularityError("Lyapunov test at the pole")
        return val

    for i in range(1, len(points)):
        a, b = points[i - 1], points[i]
        if (a.r - pole) * (b.r - pole) < 0:
            continue  # never bracket across the pole
        da, db = disc(a.r), disc(b.r)
        if da * db < 0:
            r_loc = _bisect_scalar(disc, a.r, b.r)
            if r_loc is not None:
                p_loc = _ns_point_params(N, beta, r_loc)
                # on det = 1 the double multiplier is trace/2 = +-1
                tr = model.planar_charpoly_coeffs(p_loc)[0]
                kind = "R2" if tr < 0 else "R1"
                events.append(_ns_event(kind, N, beta, r_loc))
        if a.theta is not None and b.theta is not None:
            for kind, target in (("R3", 2.0 * math.pi / 3.0), ("R4", math.pi / 2.0)):
                if (a.theta - target) * (b.theta - target) < 0:
                    r_loc = _bisect_scalar(theta_gap(target), a.r, b.r)
                    if r_loc is not None:
                        events.append(_ns_event(kind, N, beta, r_loc))
        la, lb = a.lyapunov_A, b.lyapunov_A
        if la is not None and lb is not None and la * lb < 0:
            if (a.r + beta - 1.0) * (b.r + beta - 1.0) > 0:
                r_loc = _bisect_scalar(lyap, a.r, b.r)
                if r_loc is not None:
                    events.append(_ns_event("CH", N, beta, r_loc))
    events.sort(key=lambda e: e.param_value)
    return events


def _ns_event(kind: str, N: float, beta: float, r_loc: float) -> ContinuationEvent:
    p = _ns_point_params(N, beta, r_loc)
    state = model.endemic_point(p)
    return ContinuationEvent(
        kind=kind,
        param_value=r_loc,
        state=state,
        residual=0.0,
        note=f"alpha={p.alpha!r}",
    )


def _bisect_scalar(
    fn: Callable[[float], float],
    a: float,
    b: float,
    tol_rel: float = 1e-12,
) -> Optional[float]:
    try:
        fa = fn(a)
        fb = fn(b)
    except SingularityError:
        return None
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        return None
    tol = tol_rel * (1.0 + max(abs(a), abs(b)))
    while abs(b - a) > tol:
        mid = 0.5 * (a + b)
        try:
            fm = fn(mid)
        except SingularityError:
            return None
        if fa * fm <= 0:
            b = mid
            fb = fm
        else:
            a = mid
            fa = fm
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# codim-2 diagnostics: closed forms against the reduction oracle


def codim2_diagnostics(kind: str, N: float, beta: float) -> NormalFormReport:
    """Closed-form coefficients of a codim-2 point, cross-checked numerically.

    Reports both the analytic value and the reduction oracle's, plus
    sign-agreement and relative-error checks for the deciding quantity
    of each kind (Re c1 for R3, A0 for R4, L2 for CH).
    """
    if kind not in ("R3", "R4", "CH"):
        raise DomainError(f"diagnostics cover R3, R4, CH; got {kind!r}")
    point = codim2.resonance_point(beta, kind)
    p_star = Params(N=N, alpha=point.alpha_star, beta=beta, r=point.r_star)
    if kind == "R3":
        base = codim2.resonance13_coefficients(N, beta)
        b1_num, c1_num = reduction.numeric_r3_coefficients(p_star)
        extra = {"numeric_b1": b1_num, "numeric_c1": c1_num}
        checks = _agreement_checks(
            ("re_c1", complex(base.coefficients["c1"]).real, c1_num.real),
            ("b1_abs", abs(complex(base.coefficients["b1"])), abs(b1_num)),
        )
    elif kind == "R4":
        base = codim2.resonance14_coefficients(N, beta)
        a0_num_complex, _, _ = reduction.numeric_r4_coefficients(p_star)
        extra = {"numeric_A0": a0_num_complex}
        checks = _agreement_checks(
            ("a0", float(base.coefficients["a0"]), a0_num_complex.real),
            ("b0", float(base.coefficients["b0"]), a0_num_complex.imag),
        )
    else:
        base = codim2.chenciner_L2(N, beta)
        l2_num = reduction.numeric_chenciner_l2(p_star)
        extra = {"numeric_L2": l2_num}
        checks = _agreement_checks(
            ("L2", float(base.coefficients["L2"]), l2_num),
        )
    return NormalFormReport(
        kind=base.kind,
        coefficients={**base.coefficients, **extra},
        criticality=base.criticality,
        nondegeneracy_checks=base.nondegeneracy_checks + tuple(checks),
        notes=base.notes + ("cross-checked against the reduction oracle",),
    )


def _agreement_checks(*pairs: tuple[str, float, float]) -> list[Check]:
    checks = []
    for name, analytic, numeric in pairs:
        same_sign = analytic * numeric > 0
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-300)
        checks.append(Check(f"{name}_sign_agreement", numeric, same_sign))
        checks.append(Check(f"{name}_numeric_match", rel, rel < 1e-4))
    return checks
