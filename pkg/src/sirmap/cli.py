"""Command line front end.

Subcommands cover the everyday questions (classify a parameter point,
list fixed points, simulate, sweep a parameter), the branch tracers
(continue, ns-curve), the Arnold-tongue calculator, and a self-check
suite (verify).  A scenario file is a single JSON document with a
schema_version, a command name, and an args table whose keys match the
long flag names; ``sirmap run scenario.json`` executes it.

Exit codes: 0 success, 1 invalid input, 2 numerical failure,
3 verification-suite failure.  CSV output uses UTF-8, LF line endings
and 17 significant digits, written atomically (temp file + rename), so
rerunning a command produces a bit-identical file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from . import classify, continuation, model, orbits, reduction
from .errors import DomainError, SirmapError
from .model import Params
from .normalforms import codim1, codim2, tongues

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# plumbing


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage through the normal error path."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise DomainError(message)


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sirmap-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
        tmp = ""
    finally:
        if tmp and os.path.exists(tmp):
            os.unlink(tmp)


def _sig(value: Any) -> str:
    """One CSV cell: 17 significant digits for floats, verbatim strings."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _csv_text(header: list[str], rows: list[list[Any]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_sig(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_default(obj: Any) -> Any:
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _merged(ns: argparse.Namespace, scen: dict, name: str, default: Any = None) -> Any:
    value = getattr(ns, name, None)
    if value is None:
        value = scen.get(name, default)
    return value


def _need(ns: argparse.Namespace, scen: dict, name: str) -> Any:
    value = _merged(ns, scen, name)
    if value is None:
        flag = "--" + name.replace("_", "-")
        raise DomainError(f"missing required value {name!r} ({flag} or scenario key)")
    return value


def _params(ns: argparse.Namespace, scen: dict) -> Params:
    return Params(
        N=float(_need(ns, scen, "N")),
        beta=float(_need(ns, scen, "beta")),
        r=float(_need(ns, scen, "r")),
        alpha=float(_need(ns, scen, "alpha")),
    )


def _emit(ns: argparse.Namespace, scen: dict, obj: Any) -> None:
    out = _merged(ns, scen, "out")
    text = _json_text(obj)
    if out:
        _write_atomic(str(out), text)
    else:
        sys.stdout.write(text)


def _load_scenario(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise DomainError("scenario file must hold a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DomainError(
            f"unsupported scenario schema_version {version!r}; expected {SCHEMA_VERSION}"
        )
    return doc


def _scenario_args(ns: argparse.Namespace) -> dict:
    path = getattr(ns, "scenario", None)
    if not path:
        return {}
    doc = _load_scenario(path)
    args = dict(doc.get("args", {}))
    if "out" in doc and "out" not in args:
        args["out"] = doc["out"]
    return args


def _load_overrides(spec: Any) -> dict[str, float]:
    if spec is None:
        return {}
    if isinstance(spec, dict):
        return {str(k): float(v) for k, v in spec.items()}
    text = str(spec)
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            doc = json.load(fh)
    elif os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(text)
    if not isinstance(doc, dict):
        raise DomainError("tolerance overrides must be a JSON object")
    return {str(k): float(v) for k, v in doc.items()}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_classify(ns: argparse.Namespace, scen: dict) -> int:
    p = _params(ns, scen)
    _emit(ns, scen, classify.classify_all(p))
    return EXIT_OK


def _cmd_fixed_points(ns: argparse.Namespace, scen: dict) -> int:
    p = _params(ns, scen)
    labels = classify.classify_all(p)
    payload: dict[str, Any] = {"E2": None}
    for rec in model.fixed_points(p):
        ms = rec.multipliers
        payload[rec.which] = {
            "state": list(rec.point),
            "multipliers": {
                "decoupled": ms.mu_real,
                "t1": complex(ms.t1),
                "t2": complex(ms.t2),
                "discriminant": ms.delta,
            },
            "label": labels.get(rec.which),
            "coincident": rec.coincident,
        }
    if payload["E2"] is None:
        payload["E2"] = labels.get("E2", "nonexistent")
    _emit(ns, scen, payload)
    return EXIT_OK


def _seed_from(ns: argparse.Namespace, scen: dict, p: Params) -> model.State3:
    x0 = _merged(ns, scen, "x0")
    y0 = _merged(ns, scen, "y0")
    z0 = _merged(ns, scen, "z0")
    given = [v is not None for v in (x0, y0, z0)]
    if not any(given):
        return orbits._default_seed(p)
    if not all(given):
        raise DomainError("give all of --x0/--y0/--z0 or none")
    return (float(x0), float(y0), float(z0))


def _cmd_simulate(ns: argparse.Namespace, scen: dict) -> int:
    p = _params(ns, scen)
    seed = _seed_from(ns, scen, p)
    transient = int(_merged(ns, scen, "transient", orbits.DEFAULT_TRANSIENT))
    keep = int(_merged(ns, scen, "keep", orbits.DEFAULT_KEEP))
    summary = orbits.iterate(p, seed, n_transient=transient, n_keep=keep)
    out = _merged(ns, scen, "out")
    if out:
        rows = [[i, s[0], s[1], s[2]] for i, s in enumerate(summary.samples)]
        _write_atomic(str(out), _csv_text(["step", "x", "y", "z"], rows))
    sys.stdout.write(
        _json_text(
            {
                "seed": list(seed),
                "period": summary.period,
                "rotation_number": summary.rotation_number,
                "locked": summary.locked_fraction,
                "max_norm": summary.max_norm,
                "diverged_at": summary.diverged_at,
                "samples_kept": int(len(summary.samples)),
            }
        )
    )
    return EXIT_OK


def _cmd_sweep(ns: argparse.Namespace, scen: dict) -> int:
    param = str(_merged(ns, scen, "param", "alpha"))
    lo = float(_need(ns, scen, "start"))
    hi = float(_need(ns, scen, "stop"))
    if getattr(ns, param, None) is None and param not in scen:
        scen = {**scen, param: lo}
    p = _params(ns, scen)
    steps = int(_merged(ns, scen, "steps", 201))
    transient = int(_merged(ns, scen, "transient", orbits.DEFAULT_TRANSIENT))
    keep = int(_merged(ns, scen, "keep", orbits.DEFAULT_KEEP))
    seed_policy = str(_merged(ns, scen, "seed_policy", "inherit"))
    records = orbits.sweep_bifurcation(
        p,
        param,
        (lo, hi),
        steps,
        seed_policy=seed_policy,
        n_transient=transient,
        n_keep=keep,
    )
    out = _merged(ns, scen, "out")
    if out:
        rows = [
            [rec.value, rec.period, rec.max_norm, rec.error or ""] for rec in records
        ]
        _write_atomic(str(out), _csv_text([param, "period", "max_norm", "error"], rows))
    transitions = []
    for a, b in zip(records, records[1:]):
        if a.period != b.period:
            transitions.append(
                {"from": a.period, "to": b.period, "between": [a.value, b.value]}
            )
    sys.stdout.write(
        _json_text({"param": param, "points": len(records), "transitions": transitions})
    )
    return EXIT_OK


def _cmd_continue(ns: argparse.Namespace, scen: dict) -> int:
    param = str(_merged(ns, scen, "param", "alpha"))
    lo = float(_need(ns, scen, "start"))
    hi = float(_need(ns, scen, "stop"))
    branch = str(_merged(ns, scen, "branch", "endemic"))
    if branch not in ("endemic", "disease-free"):
        raise DomainError(f"branch must be 'endemic' or 'disease-free', got {branch!r}")
    values: dict[str, Optional[float]] = {}
    for name in ("N", "beta", "r", "alpha"):
        v = _merged(ns, scen, name)
        values[name] = None if v is None else float(v)
    if param in values:
        values[param] = lo
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise DomainError(f"missing model parameters: {', '.join(missing)}")
    p0 = Params(N=values["N"], beta=values["beta"], r=values["r"], alpha=values["alpha"])
    s0 = (p0.N, 0.0, 0.0) if branch == "disease-free" else model.endemic_point(p0)
    stop_raw = _merged(ns, scen, "stop_at")
    stop_at = tuple(s for s in str(stop_raw).split(",") if s) if stop_raw else ()
    curve = continuation.continue_fixed_points(
        p0, s0, param, (lo, hi), stop_at=stop_at
    )
    out = _merged(ns, scen, "out")
    if out:
        rows = []
        for pt in curve.points:
            rows.append(
                [
                    pt.param_value,
                    pt.state[0],
                    pt.state[1],
                    pt.state[2],
                    abs(pt.multipliers[0]),
                    abs(pt.multipliers[1]),
                    abs(pt.multipliers[2]),
                    pt.test_values["BP"],
                    pt.test_values["PD"],
                    pt.test_values["NS"],
                ]
            )
        header = [param, "x", "y", "z", "mod_t1", "mod_t2", "mod_t3", "BP", "PD", "NS"]
        _write_atomic(str(out), _csv_text(header, rows))
    sys.stdout.write(
        _json_text(
            {
                "param": param,
                "branch": branch,
                "points": len(curve.points),
                "events": [
                    {
                        "kind": ev.kind,
                        param: ev.param_value,
                        "state": list(ev.state),
                        "residual": ev.residual,
                        "note": ev.note,
                    }
                    for ev in curve.events
                ],
                "notes": list(curve.notes),
            }
        )
    )
    return EXIT_OK


def _cmd_ns_curve(ns: argparse.Namespace, scen: dict) -> int:
    N = float(_need(ns, scen, "N"))
    beta = float(_need(ns, scen, "beta"))
    lo = float(_need(ns, scen, "start"))
    hi = float(_need(ns, scen, "stop"))
    n_points = int(_merged(ns, scen, "points", 600))
    curve = continuation.continue_ns_curve(N, beta, (lo, hi), n_points)
    out = _merged(ns, scen, "out")
    if out:
        rows = [
            [pt.r, pt.alpha, pt.theta, pt.lyapunov_A, pt.implicit_gap]
            for pt in curve.points
        ]
        header = ["r", "alpha", "theta", "lyapunov_A", "implicit_gap"]
        _write_atomic(str(out), _csv_text(header, rows))
    events = []
    for ev in curve.events:
        events.append(
            {
                "kind": ev.kind,
                "r": ev.param_value,
                "alpha": classify.psi3(beta, ev.param_value),
            }
        )
    sys.stdout.write(
        _json_text(
            {
                "beta": beta,
                "N": N,
                "points": len(curve.points),
                "events": events,
                "max_implicit_gap": curve.max_implicit_gap,
                "notes": list(curve.notes),
            }
        )
    )
    return EXIT_OK


def _cmd_tongue(ns: argparse.Namespace, scen: dict) -> int:
    N = float(_need(ns, scen, "N"))
    beta = float(_need(ns, scen, "beta"))
    n = int(_need(ns, scen, "n"))
    m = int(_need(ns, scen, "m"))
    sigma = _merged(ns, scen, "sigma_abs")
    spec = tongues.arnold_tongue(N, beta, n, m, None if sigma is None else float(sigma))
    payload: dict[str, Any] = {
        "n": spec.n,
        "m": spec.m,
        "r_star": spec.r_star,
        "alpha_star": spec.alpha_star,
        "rho3_0": spec.rho3_0,
        "rho2tilde_0": spec.rho2tilde_0,
        "sigma_abs": spec.sigma_abs,
    }
    at_r = _merged(ns, scen, "at_r")
    at_alpha = _merged(ns, scen, "at_alpha")
    if (at_r is None) != (at_alpha is None):
        raise DomainError("--at-r and --at-alpha must be given together")
    if at_r is not None:
        r_q, a_q = float(at_r), float(at_alpha)
        payload["query"] = {
            "r": r_q,
            "alpha": a_q,
            "omega1": spec.omega1(r_q, a_q),
            "omega2": spec.omega2(r_q, a_q),
            "T_minus": spec.T_minus(r_q, a_q),
            "T_plus": spec.T_plus(r_q, a_q),
            "member": spec.contains(r_q, a_q),
        }
    _emit(ns, scen, payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# the verify suite: frozen reference values recomputed from scratch


_PIN = {
    "theta1": -0.7871437846,
    "theta2": 2344.468744,
    "psi2_flip": 4.0019563901,
    "r3_b1": complex(-5.54480396525, 4.06944160416),
    "r3_Rc": 0.0428180234005,
    "r3_Ic": -0.187994561140,
    "r4_a0": 0.1120520,
    "r4_b0": 0.09589064,
    "ch_l2_a": 149.5801518823,
    "ch_l2_b": -3.162814375570e-6,
    "tongue_r_star": 0.4311216871,
    "tongue_alpha_star": 5.351159452,
    "tongue_rho2tilde": -0.084690582253,
    "tongue_rho3": -0.002346818430,
    "tongue_sigma_printed": 0.01020466542,
}

_NS_EVENT_PINS = {
    "R2": (0.766957, 13.586957),
    "R3": (0.799403, 10.494403),
    "R4": (0.870476, 7.440476),
    "CH": (2.805000, 4.595588),
}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _chk_multipliers(tols: dict[str, float]) -> tuple[bool, str]:
    rng = np.random.default_rng(20250819)
    tol = tols.get("multiplier_abs", 1e-10)
    worst = 0.0
    for _ in range(200):
        beta = rng.uniform(0.05, 0.95)
        r = rng.uniform(0.05, 1.5)
        N = rng.uniform(0.2, 50.0)
        alpha = (beta + r) * rng.uniform(1.01, 6.0)
        p = Params(N=N, beta=beta, r=r, alpha=alpha)
        ms = model.multipliers_E2(p)
        eigs = np.linalg.eigvals(model.jacobian_at(p, model.endemic_point(p)))
        for t in (complex(ms.t1), complex(ms.t2), complex(ms.mu_real)):
            worst = max(worst, min(abs(t - e) for e in eigs))
    return worst < tol, f"max |closed form - eigensolver| = {worst:.3e} (tol {tol:g})"


def _chk_classification(tols: dict[str, float]) -> tuple[bool, str]:
    rng = np.random.default_rng(20250820)
    bad = 0
    total = 0
    for _ in range(2000):
        beta = rng.uniform(0.05, 0.95)
        r = rng.uniform(0.05, 1.2)
        N = rng.uniform(0.2, 10.0)
        alpha = rng.uniform(0.1, 20.0)
        p = Params(N=N, beta=beta, r=r, alpha=alpha)
        try:
            topo = classify.classify_E2(p)
        except DomainError:
            continue
        if topo.tag == classify.NON_HYPERBOLIC:
            continue
        total += 1
        eigs = np.linalg.eigvals(model.jacobian_at(p, model.endemic_point(p)))
        n_out = int(sum(abs(e) > 1.0 for e in eigs))
        expected = {
            classify.STABLE_NODE: (0,),
            classify.STABLE_FOCUS_NODE: (0,),
            classify.SADDLE_POINT: (1, 2),
            classify.SADDLE_FOCUS: (1, 2),
            classify.UNSTABLE_NODE: (3,),
            classify.UNSTABLE_FOCUS_NODE: (3,),
        }[topo.tag]
        if n_out not in expected:
            bad += 1
    return bad == 0, f"{total} hyperbolic endemic points, {bad} label/eigensolver clashes"


def _chk_flip_pins(tols: dict[str, float]) -> tuple[bool, str]:
    tol = tols.get("pin_rel", 1e-6)
    t1 = codim1.flip_theta1(0.52, 0.21)
    t2 = codim1.flip_theta2(0.72, 0.52, 0.21)
    psi2 = classify.psi2(0.52, 0.21)
    errs = (
        _rel(t1, _PIN["theta1"]),
        _rel(t2, _PIN["theta2"]),
        _rel(psi2, _PIN["psi2_flip"]),
    )
    return max(errs) < tol, f"theta1/theta2/psi2 rel errs {errs[0]:.2e}/{errs[1]:.2e}/{errs[2]:.2e}"


def _chk_ns_lyapunov(tols: dict[str, float]) -> tuple[bool, str]:
    tol = tols.get("lyapunov_rel", 1e-6)
    pinned = codim1.first_lyapunov_A(1.25, 0.32, 0.7983)
    if pinned <= 0:
        return False, f"expected positive first Lyapunov quantity, got {pinned!r}"
    rng = np.random.default_rng(20250821)
    worst = 0.0
    tried = 0
    while tried < 5:
        beta = rng.uniform(0.15, 0.85)
        r = 1.0 - beta + rng.uniform(0.05, 1.0)
        alpha = classify.psi3(beta, r)
        if alpha is None or alpha <= beta + r:
            continue
        p = Params(N=rng.uniform(0.5, 5.0), beta=beta, r=r, alpha=alpha)
        if model.planar_discriminant(p) >= 0:
            continue
        try:
            analytic = codim1.first_lyapunov_A(p.N, beta, r)
        except SirmapError:
            continue
        numeric = reduction.numeric_ns_coefficient(p)
        worst = max(worst, _rel(analytic, numeric))
        tried += 1
    ok = worst < tol and pinned > 0
    return ok, f"pin positive ({pinned:.5g}), max rel err vs oracle {worst:.2e}"


def _chk_ns_curve_events(tols: dict[str, float]) -> tuple[bool, str]:
    tol_abs = tols.get("event_abs", 1e-4)
    tol_closed = tols.get("event_closed_form", 1e-9)
    curve = continuation.continue_ns_curve(1.25, 0.32, (0.70, 2.95), 600)
    found = {ev.kind: ev.param_value for ev in curve.events}
    problems = []
    for kind, (r_pin, a_pin) in _NS_EVENT_PINS.items():
        if kind not in found:
            problems.append(f"{kind} missing")
            continue
        r_loc = found[kind]
        a_loc = classify.psi3(0.32, r_loc)
        if abs(r_loc - r_pin) > tol_abs or abs(a_loc - a_pin) > tol_abs:
            problems.append(f"{kind} at ({r_loc:.6f}, {a_loc:.6f})")
            continue
        closed = codim2.resonance_point(0.32, kind)
        if abs(r_loc - closed.r_star) > tol_closed:
            problems.append(f"{kind} off closed form by {abs(r_loc - closed.r_star):.2e}")
    if curve.max_implicit_gap > 1e-9 * (1.0 + 14.0):
        problems.append(f"implicit gap {curve.max_implicit_gap:.2e}")
    if problems:
        return False, "; ".join(problems)
    return True, f"R2/R3/R4/CH located, max implicit gap {curve.max_implicit_gap:.2e}"


def _chk_codim2_pins(tols: dict[str, float]) -> tuple[bool, str]:
    tol = tols.get("pin_rel", 1e-6)
    r3 = codim2.resonance13_coefficients(1.25, 0.32)
    b1 = complex(r3.coefficients["b1"])
    errs = [
        abs(b1 - _PIN["r3_b1"]) / abs(_PIN["r3_b1"]),
        _rel(float(r3.coefficients["R_c"]), _PIN["r3_Rc"]),
        _rel(float(r3.coefficients["I_c"]), _PIN["r3_Ic"]),
    ]
    r4 = codim2.resonance14_coefficients(1.0, 0.32)
    errs.append(_rel(float(r4.coefficients["a0"]), _PIN["r4_a0"]))
    errs.append(_rel(float(r4.coefficients["b0"]), _PIN["r4_b0"]))
    ch_a = codim2.chenciner_L2(1.25, 0.32)
    ch_b = codim2.chenciner_L2(16.32, 0.72)
    errs.append(_rel(float(ch_a.coefficients["L2"]), _PIN["ch_l2_a"]))
    errs.append(_rel(float(ch_b.coefficients["L2"]), _PIN["ch_l2_b"]))
    worst = max(errs)
    return worst < max(tol, 5e-6), f"max rel err over 7 pinned coefficients {worst:.2e}"


def _chk_tongue_pins(tols: dict[str, float]) -> tuple[bool, str]:
    tol = tols.get("pin_rel", 1e-6)
    spec = tongues.arnold_tongue(10.0, 0.9, 2, 5, sigma_abs=_PIN["tongue_sigma_printed"])
    errs = (
        _rel(spec.r_star, _PIN["tongue_r_star"]),
        _rel(spec.alpha_star, _PIN["tongue_alpha_star"]),
        _rel(spec.rho2tilde_0, _PIN["tongue_rho2tilde"]),
        _rel(spec.rho3_0, _PIN["tongue_rho3"]),
    )
    apex_alpha = classify.psi3(0.9, spec.r_star)
    apex_gap = abs(spec.alpha_star - apex_alpha) / (1.0 + abs(spec.alpha_star))
    ok = max(errs) < tol and apex_gap < 1e-9
    return ok, (
        f"pin rel errs up to {max(errs):.2e}, apex identity gap {apex_gap:.2e}"
    )


def _chk_tongue_sigma(tols: dict[str, float]) -> tuple[bool, str]:
    tol = tols.get("tongue_sigma_abs_rel", 1e-5)
    numeric = tongues.numeric_sigma_abs(10.0, 0.9, 2, 5)
    printed = _PIN["tongue_sigma_printed"]
    rel = _rel(numeric, printed)
    return rel < tol, (
        f"recomputed |sigma| = {numeric:.11g} vs published {printed:.11g} "
        f"(rel gap {rel:.3e}, tol {tol:g})"
    )


def _chk_center_manifold(tols: dict[str, float]) -> tuple[bool, str]:
    tol = tols.get("cm_abs", 1e-6)
    p = Params(N=0.51, beta=0.31, r=0.27, alpha=0.58)
    fit = reduction.fit_center_manifold_E1(p)
    target = (p.beta + p.r) ** 2 / (p.r * p.N * p.beta)
    errs = (
        abs(fit["d11"] - target),
        abs(fit["d12"]),
        abs(fit["d13"]),
    )
    return max(errs) < tol, f"d11 err {errs[0]:.2e}, d12/d13 {errs[1]:.1e}/{errs[2]:.1e}"


_VERIFY_CHECKS: list[tuple[str, Callable[[dict[str, float]], tuple[bool, str]]]] = [
    ("multipliers_vs_eigensolver", _chk_multipliers),
    ("classification_soundness", _chk_classification),
    ("flip_threshold_pins", _chk_flip_pins),
    ("ns_lyapunov_quantity", _chk_ns_lyapunov),
    ("ns_curve_events", _chk_ns_curve_events),
    ("codim2_coefficient_pins", _chk_codim2_pins),
    ("tongue_apex_pins", _chk_tongue_pins),
    ("tongue_sigma_abs", _chk_tongue_sigma),
    ("center_manifold_fit", _chk_center_manifold),
]


def _cmd_verify(ns: argparse.Namespace, scen: dict) -> int:
    tols = _load_overrides(_merged(ns, scen, "tolerance_overrides"))
    failures = 0
    for name, fn in _VERIFY_CHECKS:
        try:
            ok, detail = fn(tols)
        except SirmapError as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
        failures += 0 if ok else 1
    sys.stdout.write(
        f"{len(_VERIFY_CHECKS) - failures}/{len(_VERIFY_CHECKS)} checks passed\n"
    )
    return EXIT_OK if failures == 0 else EXIT_VERIFICATION


# ---------------------------------------------------------------------------
# dispatch


_HANDLERS: dict[str, Callable[[argparse.Namespace, dict], int]] = {
    "classify": _cmd_classify,
    "fixed-points": _cmd_fixed_points,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "continue": _cmd_continue,
    "ns-curve": _cmd_ns_curve,
    "tongue": _cmd_tongue,
    "verify": _cmd_verify,
}


def run(scenario: str | dict) -> int:
    """Execute a scenario document (path or already-parsed dict)."""
    doc = _load_scenario(scenario) if isinstance(scenario, str) else scenario
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise DomainError(f"scenario must carry schema_version {SCHEMA_VERSION}")
    command = doc.get("command")
    if command not in _HANDLERS:
        raise DomainError(f"unknown scenario command {command!r}")
    args = dict(doc.get("args", {}))
    if "out" in doc and "out" not in args:
        args["out"] = doc["out"]
    return _HANDLERS[command](argparse.Namespace(), args)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="JSON scenario supplying argument defaults")
    common.add_argument("--out", help="write the main table/report to this file")
    common.add_argument(
        "--threads",
        type=int,
        help="compute thread cap (accepted for compatibility; runs are single-threaded)",
    )
    common.add_argument(
        "--tolerance-overrides",
        dest="tolerance_overrides",
        help="JSON object (inline, path, or @path) overriding named tolerances",
    )

    model_flags = argparse.ArgumentParser(add_help=False)
    model_flags.add_argument("--N", type=float, help="total population")
    model_flags.add_argument("--beta", type=float, help="birth/death rate")
    model_flags.add_argument("--r", type=float, help="recovery rate")
    model_flags.add_argument("--alpha", type=float, help="contact rate")

    parser = _Parser(prog="sirmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common, model_flags],
                   help="stability-table labels for both fixed points")
    sub.add_parser("fixed-points", parents=[common, model_flags],
                   help="fixed points with multipliers and labels")

    p_sim = sub.add_parser("simulate", parents=[common, model_flags],
                           help="iterate an orbit and summarize it")
    p_sim.add_argument("--x0", type=float)
    p_sim.add_argument("--y0", type=float)
    p_sim.add_argument("--z0", type=float)
    p_sim.add_argument("--transient", type=int)
    p_sim.add_argument("--keep", type=int)

    p_sweep = sub.add_parser("sweep", parents=[common, model_flags],
                             help="orbit summaries along a parameter grid")
    p_sweep.add_argument("--param", choices=("alpha", "beta", "r", "N"))
    p_sweep.add_argument("--from", dest="start", type=float)
    p_sweep.add_argument("--to", dest="stop", type=float)
    p_sweep.add_argument("--steps", type=int)
    p_sweep.add_argument("--transient", type=int)
    p_sweep.add_argument("--keep", type=int)
    p_sweep.add_argument("--seed-policy", dest="seed_policy",
                         choices=("inherit", "reset"))

    p_cont = sub.add_parser("continue", parents=[common, model_flags],
                            help="trace a fixed-point branch and its events")
    p_cont.add_argument("--param", choices=("alpha", "beta", "r", "N"))
    p_cont.add_argument("--from", dest="start", type=float)
    p_cont.add_argument("--to", dest="stop", type=float)
    p_cont.add_argument("--branch", choices=("endemic", "disease-free"))
    p_cont.add_argument("--stop-at", dest="stop_at",
                        help="comma-separated event kinds that halt the trace")

    p_ns = sub.add_parser("ns-curve", parents=[common, model_flags],
                          help="two-parameter torus-birth curve with codim-2 events")
    p_ns.add_argument("--from", dest="start", type=float, help="lower r bound")
    p_ns.add_argument("--to", dest="stop", type=float, help="upper r bound")
    p_ns.add_argument("--points", type=int)

    p_tng = sub.add_parser("tongue", parents=[common, model_flags],
                           help="Arnold tongue coefficients and membership")
    p_tng.add_argument("--n", type=int, help="rotation numerator")
    p_tng.add_argument("--m", type=int, help="rotation denominator (>= 5)")
    p_tng.add_argument("--sigma-abs", dest="sigma_abs", type=float)
    p_tng.add_argument("--at-r", dest="at_r", type=float)
    p_tng.add_argument("--at-alpha", dest="at_alpha", type=float)

    sub.add_parser("verify", parents=[common],
                   help="recompute frozen reference values; exit 3 on mismatch")

    p_run = sub.add_parser("run", parents=[common],
                           help="execute a JSON scenario file")
    p_run.add_argument("scenario_path", nargs="?", help="scenario JSON path")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    try:
        parser = _build_parser()
        ns = parser.parse_args(argv)
        if ns.command == "run":
            path = getattr(ns, "scenario_path", None) or getattr(ns, "scenario", None)
            if not path:
                raise DomainError("run needs a scenario file")
            doc = _load_scenario(path)
            if getattr(ns, "out", None):
                doc.setdefault("args", {})["out"] = ns.out
            return run(doc)
        scen = _scenario_args(ns)
        return _HANDLERS[ns.command](ns, scen)
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except (json.JSONDecodeError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except SirmapError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
