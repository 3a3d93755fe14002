"""Center-manifold reductions and numeric normal forms.

This module is the independent oracle for every closed-form coefficient
in :mod:`sirmap.normalforms`.  The map is quadratic, so all Taylor
tensors are exact; "numeric" means numeric linear algebra and
homological-equation solves, not numeric differentiation.

The planar dynamics at the endemic point are complexified as

    w' = mu0*w + g20*w^2 + g11*w*wbar + g02*wbar^2

(plain monomial coefficients, no factorial weights), then brought to
normal form by order-by-order near-identity substitutions.  Resonant
monomials w^j wbar^k (j - k = 1 always; additionally j - k = 1 mod m
when an m:1 rotation number is declared) are kept; everything else is
killed against the divisor mu0^j mu0bar^k - mu0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import model
from .errors import DomainError, OracleFailureError, SmallDivisorError
from .model import Params

Series = dict[tuple[int, int], complex]

_COEFF_FLOOR = 1e-15
_DIVISOR_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# truncated bivariate series in (w, wbar)


def series_trim(s: Series, order: int) -> Series:
    return {jk: c for jk, c in s.items() if jk[0] + jk[1] <= order and c != 0}


def series_add(a: Series, b: Series) -> Series:
    out = dict(a)
    for jk, c in b.items():
        out[jk] = out.get(jk, 0.0) + c
    return {jk: c for jk, c in out.items() if c != 0}


def series_mul(a: Series, b: Series, order: int) -> Series:
    out: Series = {}
    for (ja, ka), ca in a.items():
        for (jb, kb), cb in b.items():
            j, k = ja + jb, ka + kb
            if j + k > order:
                continue
            key = (j, k)
            out[key] = out.get(key, 0.0) + ca * cb
    return {jk: c for jk, c in out.items() if c != 0}


def series_conj(s: Series) -> Series:
    """Conjugate as a function on the real slice wbar = conj(w)."""
    return {(k, j): complex(c).conjugate() for (j, k), c in s.items()}


def series_pow(s: Series, n: int, order: int) -> Series:
    out: Series = {(0, 0): 1.0 + 0j}
    for _ in range(n):
        out = series_mul(out, s, order)
    return out


def series_compose(f: Series, g: Series, order: int) -> Series:
    """f(g(w, wbar), conj(g)(w, wbar)) truncated to ``order``.

    ``g`` must have no constant term.
    """
    gc = series_conj(g)
    # cache powers on demand
    gp: dict[int, Series] = {0: {(0, 0): 1.0 + 0j}}
    gcp: dict[int, Series] = {0: {(0, 0): 1.0 + 0j}}
    out: Series = {}
    for (j, k), c in f.items():
        if j not in gp:
            for n in range(max(gp) + 1, j + 1):
                gp[n] = series_mul(gp[n - 1], g, order)
        if k not in gcp:
            for n in range(max(gcp) + 1, k + 1):
                gcp[n] = series_mul(gcp[n - 1], gc, order)
        term = series_mul(gp[j], gcp[k], order)
        for jk, t in term.items():
            out[jk] = out.get(jk, 0.0) + c * t
    return {jk: c for jk, c in out.items() if c != 0}


def series_invert(k_series: Series, order: int) -> Series:
    """Inverse of a near-identity series w + h (h of order >= 2)."""
    if abs(k_series.get((1, 0), 0.0) - 1.0) > 1e-14 or k_series.get((0, 1)):
        raise ValueError("series_invert expects the identity linear part")
    h = {jk: c for jk, c in k_series.items() if jk != (1, 0)}
    inv: Series = {(1, 0): 1.0 + 0j}
    for _ in range(order):
        correction = series_compose(h, inv, order)
        inv = series_add({(1, 0): 1.0 + 0j}, {jk: -c for jk, c in correction.items()})
    return series_trim(inv, order)


def is_resonant(j: int, k: int, m: int | None) -> bool:
    """Whether w^j wbar^k survives in the normal form.

    j - k = 1 terms are always resonant on a rotation; with an m-th
    root of unity multiplier, j - k = 1 (mod m) terms join them.
    """
    if j - k == 1:
        return True
    if m is not None and (j - k - 1) % m == 0:
        return True
    return False


def normal_form(series: Series, order: int, m: int | None = None) -> Series:
    """Kill non-resonant terms of a complexified planar map.

    ``series`` must contain the linear coefficient at key (1, 0).
    Returns the transformed series; resonant coefficients up to
    ``order`` are the normal-form values, non-resonant ones are zeroed
    (to round-off).
    """
    mu0 = complex(series[(1, 0)])
    mu0b = mu0.conjugate()
    g = series_trim(series, order)
    for n in range(2, order + 1):
        h: Series = {}
        for (j, k), c in g.items():
            if j + k != n or is_resonant(j, k, m):
                continue
            if abs(c) < _COEFF_FLOOR:
                continue
            div = mu0**j * mu0b**k - mu0
            if abs(div) < _DIVISOR_FLOOR:
                raise SmallDivisorError(j, k, div)
            h[(j, k)] = c / div
        if not h:
            continue
        k_series = series_add({(1, 0): 1.0 + 0j}, h)
        k_inv = series_invert(k_series, order)
        g = series_compose(k_inv, series_compose(g, k_series, order), order)
    return g


# ---------------------------------------------------------------------------
# complexification of the planar block at E2


def planar_complex_data(p: Params) -> tuple[complex, Series]:
    """(mu0, quadratic series) of the complexified planar map at E2.

    Requires a complex multiplier pair.  mu0 is the upper-half-plane
    multiplier; the returned series carries keys (1,0), (2,0), (1,1),
    (0,2).
    """
    ms = model.multipliers_E2(p)
    if ms.delta >= 0:
        raise DomainError(
            "complexification needs a complex multiplier pair (delta < 0); "
            f"got delta={ms.delta:.3e}"
        )
    a2 = model.planar_block_E2(p)
    mu0 = complex(ms.t1)
    q1 = (mu0 - a2[1, 1]) / a2[1, 0]
    q1b = q1.conjugate()
    a = p.alpha / p.N
    # Quadratic deviation terms are (-a*u*v, +a*u*v); in the complex
    # coordinate with (u, v) = (q*w + qbar*wbar)/2, q = (q1, 1):
    c = 2 * ((-a) - q1b * a) / (q1 - q1b)
    return mu0, {
        (1, 0): mu0,
        (2, 0): c * q1 / 4,
        (1, 1): c * (q1 + q1b) / 4,
        (0, 2): c * q1b / 4,
    }


def numeric_normal_form(p: Params, order: int, m: int | None = None) -> Series:
    """Normal-form coefficient table of the planar map at E2."""
    _, series = planar_complex_data(p)
    return normal_form(series, order, m)


def numeric_ns_coefficient(p: Params) -> float:
    """First Lyapunov quantity at a Neimark-Sacker point, numerically.

    Computes the resonant cubic coefficient c1 = [w^2 wbar] of the
    order-3 normal form and returns Re(conj(mu0) * c1).  On the NS
    locus |mu0| = 1 this is the standard criticality decider.
    """
    mu0, series = planar_complex_data(p)
    nf = normal_form(series, 3)
    c1 = nf.get((2, 1), 0.0)
    return (mu0.conjugate() * c1).real


def numeric_pd_coefficient(p: Params) -> float:
    """1-D flip coefficient e(0) = a2^2 + a3 from the reduced map.

    Valid at a flip point (planar multiplier -1).  The center manifold
    of the planar map is computed in the real eigenbasis; the returned
    magnitude depends on the (deterministic, unit-norm) eigenvector
    scaling, but the sign does not.
    """
    ms = model.multipliers_E2(p)
    if ms.delta < 0:
        raise DomainError("flip reduction needs real multipliers")
    lam_flip = complex(ms.t1).real if abs(ms.t1 + 1) < abs(ms.t2 + 1) else complex(ms.t2).real
    if abs(lam_flip + 1.0) > 1e-6:
        raise DomainError(
            f"not on the flip locus: nearest multiplier to -1 is {lam_flip}"
        )
    a2 = model.planar_block_E2(p)
    evals, evecs = np.linalg.eig(a2)
    order = np.argsort(np.abs(evals + 1.0))
    lam_s = float(evals[order[1]].real)
    t = np.real(evecs[:, order])
    # deterministic scaling: unit columns, positive first component
    for col in range(2):
        n = np.linalg.norm(t[:, col])
        s = 1.0 if t[0, col] >= 0 else -1.0
        t[:, col] *= s / n
    a = p.alpha / p.N
    cu, cw = np.linalg.solve(t, np.array([-a, a]))
    pq = t[0, 0] * t[1, 0]
    q = t[0, 0] * t[1, 1] + t[0, 1] * t[1, 0]
    a_2 = cu * pq
    rho2 = cw * pq / (1.0 - lam_s)
    a_3 = cu * q * rho2
    return float(a_2 * a_2 + a_3)


def numeric_r3_coefficients(p: Params) -> tuple[complex, complex]:
    """(b1, c1) of the 1:3 resonant normal form, numerically.

    The engine keeps wbar^2 and w^2 wbar at a cube-root multiplier;
    rescaling by the root zeta = exp(2 pi i/3) converts them to the
    textbook pair used by conditions (R3.1)/(R3.2).
    """
    nf = numeric_normal_form(p, order=3, m=3)
    b_term = complex(nf.get((0, 2), 0.0))
    a_term = complex(nf.get((2, 1), 0.0))
    zeta = complex(-0.5, 0.5 * math.sqrt(3.0))
    b1 = 3.0 * zeta.conjugate() * b_term
    c1 = -3.0 * abs(b_term) ** 2 + 3.0 * zeta * zeta * a_term
    return b1, c1


def numeric_r4_coefficients(p: Params) -> tuple[complex, complex, complex]:
    """(A0, c1, d1) of the 1:4 resonant normal form, numerically.

    c1 = -i C and d1 = -i D where C, D multiply w^2 wbar and wbar^3;
    A0 = c1/|d1| is the scale-free quantity that places the resonance
    in its bifurcation-diagram region.
    """
    nf = numeric_normal_form(p, order=3, m=4)
    c1 = -1j * complex(nf.get((2, 1), 0.0))
    d1 = -1j * complex(nf.get((0, 3), 0.0))
    if abs(d1) < 1e-14:
        raise OracleFailureError("degenerate 1:4 point: d1 vanished")
    return c1 / abs(d1), c1, d1


def numeric_chenciner_l2(p: Params) -> float:
    """Second Lyapunov coefficient from the fifth-order normal form.

    L2 = Re(c2/mu0) + Im(c1/mu0)^2 / 2 with c1, c2 the cubic and
    quintic resonant coefficients; at a genuine Chenciner point
    Re(c1/mu0) vanishes, and this combination is invariant under the
    residual phase freedom of the reduction.
    """
    nf = numeric_normal_form(p, order=5)
    mu0 = complex(nf[(1, 0)])
    c1 = complex(nf.get((2, 1), 0.0))
    c2 = complex(nf.get((3, 2), 0.0))
    return (c2 / mu0).real + 0.5 * (c1 / mu0).imag ** 2


# ---------------------------------------------------------------------------
# exact planar restriction (the (x, y) subsystem is closed)


@dataclass(frozen=True)
class ReducedMap2:
    """Exact 2-D restriction of the map near E2.

    ``linear`` is the planar Jacobian block; ``quad`` the (symmetric)
    quadratic tensor Q[i][j][k] with map(u) = linear@u + Q:uu; cubic
    and higher vanish identically.  ``projection`` drops z;``injection``
    re-embeds the plane with z slaved linearly along the eigenplane of
    the multiplier pair.
    """

    base_point: tuple[float, float, float]
    linear: np.ndarray
    quad: np.ndarray
    projection: np.ndarray
    injection: np.ndarray

    def step(self, u: np.ndarray) -> np.ndarray:
        q = np.einsum("ijk,j,k->i", self.quad, u, u)
        return self.linear @ u + q

    def step_truncated(self, u: np.ndarray, order: int) -> np.ndarray:
        if order <= 1:
            return self.linear @ u
        return self.step(u)


def reduce_planar(p: Params) -> ReducedMap2:
    """The exact planar reduction at E2 in deviation coordinates."""
    e2 = model.endemic_point(p)
    a2 = model.planar_block_E2(p)
    a = p.alpha / p.N
    quad = np.zeros((2, 2, 2))
    # deviation quadratic: (-a*u*v, +a*u*v), symmetrized
    quad[0, 0, 1] = quad[0, 1, 0] = -a / 2
    quad[1, 0, 1] = quad[1, 1, 0] = a / 2
    projection = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    # z slaving along the eigenplane: the linear invariance equation
    # phi(A2 u) = (1-beta)*phi(u) + r*v  for phi(u, v) = s1*u + s2*v.
    mu = 1.0 - p.beta
    lhs = a2.T - mu * np.eye(2)
    s12 = np.linalg.solve(lhs, np.array([0.0, p.r]))
    injection = np.vstack([np.eye(2), s12])
    return ReducedMap2(
        base_point=e2,
        linear=a2,
        quad=quad,
        projection=projection,
        injection=injection,
    )


# ---------------------------------------------------------------------------
# transcritical center manifold at E1


@dataclass(frozen=True)
class CenterManifoldE1:
    """Quadratic center-manifold data at the transcritical point.

    Coordinates follow the eigenbasis transformation
    (x-N, y, z) = T(delta) (u1, v1, w1) with
    T = [[-(beta+r+delta)/r, 0, 1], [(beta+delta)/r, 0, 0], [1, 1, 0]];
    the manifold is v1 = d11 u1^2 + d12 u1 delta + d13 delta^2 + ...,
    w1 = d21 u1^2 + ... and the reduced scalar map lives on u1.
    """

    d: dict[str, float]
    reduced: dict[str, float]
    basis: np.ndarray

    @property
    def quadratic_coefficient(self) -> float:
        """Second derivative of the reduced map in u1: 2 * [u1^2]."""
        return 2.0 * self.reduced["u^2"]


def _e1_basis(p: Params, delta: float) -> np.ndarray:
    return np.array(
        [
            [-(p.beta + p.r + delta) / p.r, 0.0, 1.0],
            [(p.beta + delta) / p.r, 0.0, 0.0],
            [1.0, 1.0, 0.0],
        ]
    )


def transformed_E1_map(
    p: Params, u1: float, v1: float, w1: float, delta: float
) -> tuple[float, float, float]:
    """One step of the map in the E1 eigenbasis coordinates.

    Conjugation of map_step (at alpha = beta + r + delta) by the affine
    change centred at E1 with matrix T(delta).  Exact.
    """
    t = _e1_basis(p, delta)
    dev = t @ np.array([u1, v1, w1])
    state = (p.N + dev[0], dev[1], dev[2])
    p_shift = Params(p.N, p.beta, p.r, p.beta + p.r + delta)
    nxt = model.map_step(p_shift, state)
    dev_next = np.array([nxt[0] - p.N, nxt[1], nxt[2]])
    out = np.linalg.solve(t, dev_next)
    return (out[0], out[1], out[2])


def center_manifold_E1(p: Params) -> CenterManifoldE1:
    """Quadratic manifold and reduced-map coefficients, by linear solve.

    Requires alpha = beta + r within 1e-10 relative.  In the extended
    (u1, delta) center variables the stable components' quadratic
    forcing has only a u1^2 term, so each d coefficient solves
    (1 - (1-beta)) d = forcing, i.e. d = forcing / beta.
    """
    s = p.beta + p.r
    if abs(p.alpha - s) > 1e-10 * (1.0 + abs(s)):
        raise DomainError(
            f"transcritical reduction requires alpha = beta + r; "
            f"got alpha={p.alpha}, beta+r={s}"
        )
    # Exact quadratic forcing of (v1, w1) in extended variables:
    # v1' = (1-beta) v1 + s^2 u1^2/(r N) - s u1 w1/N + h.o.t.
    # w1' = (1-beta) w1 - s^2 u1^2/(r N) + s u1 w1/N + h.o.t.
    f_v = s * s / (p.r * p.N)
    d11 = f_v / p.beta
    d21 = -f_v / p.beta
    d = {"d11": d11, "d12": 0.0, "d13": 0.0, "d21": d21, "d22": 0.0, "d23": 0.0}
    reduced = {
        "u": 1.0,
        "u*delta": 1.0,
        "u^2": -s * s / (p.r * p.N),
        "u^3": s * d21 / p.N,
        "u^2*delta": -2.0 * s / (p.r * p.N),
    }
    return CenterManifoldE1(d=d, reduced=reduced, basis=_e1_basis(p, 0.0))


def fit_center_manifold_E1(
    p: Params,
    u_scale: float = 1e-4,
    delta_scale: float = 1e-4,
    grid: int = 7,
    sweeps: int = 400,
    residual_tol: float = 1e-8,
) -> dict[str, float]:
    """Least-squares fit of the manifold coefficients from the map itself.

    Solves the invariance equations on a grid of small (u1, delta) by
    repeated linearization: evaluate the transformed map on the current
    manifold estimate, then refit the quadratic ansatz to the image.
    The sweep iteration contracts like (1-beta)^n, hence the generous
    default sweep budget with an early exit.  Used as the independent
    cross-check on :func:`center_manifold_E1`.
    """
    s = p.beta + p.r
    if abs(p.alpha - s) > 1e-10 * (1.0 + abs(s)):
        raise DomainError("fit requires alpha = beta + r")
    us = np.linspace(-u_scale, u_scale, grid)
    ds = np.linspace(-delta_scale, delta_scale, grid)
    pts = [(u, dl) for u, dl in product(us, ds)]
    # Fit through degree 4: the quadratic slots are the answer, the
    # higher slots soak up the manifold's own cubic/quartic curvature so
    # it cannot bias the quadratic coefficients (the dominant error in a
    # pure-quadratic fit at these scales).
    theta_v = np.zeros(len(_FIT_POWERS))
    theta_w = np.zeros(len(_FIT_POWERS))

    residual = math.inf
    for _ in range(sweeps):
        rows, rhs_v, rhs_w = [], [], []
        for u, dl in pts:
            b = _fit_basis_row(u, dl)
            v1 = float(b @ theta_v)
            w1 = float(b @ theta_w)
            u_next, v_next, w_next = transformed_E1_map(p, u, v1, w1, dl)
            rows.append(_fit_basis_row(u_next, dl))
            rhs_v.append(v_next)
            rhs_w.append(w_next)
        a_mat = np.array(rows)
        new_v, *_ = np.linalg.lstsq(a_mat, np.array(rhs_v), rcond=None)
        new_w, *_ = np.linalg.lstsq(a_mat, np.array(rhs_w), rcond=None)
        residual = max(
            float(np.max(np.abs(new_v - theta_v))),
            float(np.max(np.abs(new_w - theta_w))),
        )
        theta_v, theta_w = new_v, new_w
        if residual < 1e-14 * (1.0 + float(np.max(np.abs(theta_v)))):
            break
    fit_res = _fit_invariance_residual(p, theta_v, theta_w, pts)
    if fit_res > residual_tol * (1.0 + u_scale**2):
        raise OracleFailureError(
            f"center-manifold fit residual {fit_res:.3e} exceeds tolerance"
        )
    return {
        "d11": float(theta_v[0]),
        "d12": float(theta_v[1]),
        "d13": float(theta_v[2]),
        "d21": float(theta_w[0]),
        "d22": float(theta_w[1]),
        "d23": float(theta_w[2]),
    }


# (u, delta) exponent pairs: quadratic block first, then the curvature slots.
_FIT_POWERS = (
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (4, 0), (3, 1), (2, 2), (1, 3), (0, 4),
)


def _fit_basis_row(u: float, dl: float) -> np.ndarray:
    return np.array([u**i * dl**j for i, j in _FIT_POWERS])


def _fit_invariance_residual(p, theta_v, theta_w, pts) -> float:
    worst = 0.0
    for u, dl in pts:
        b = _fit_basis_row(u, dl)
        v1 = float(b @ theta_v)
        w1 = float(b @ theta_w)
        u_next, v_next, w_next = transformed_E1_map(p, u, v1, w1, dl)
        b_next = _fit_basis_row(u_next, dl)
        worst = max(
            worst,
            abs(v_next - float(b_next @ theta_v)),
            abs(w_next - float(b_next @ theta_w)),
        )
    return worst
