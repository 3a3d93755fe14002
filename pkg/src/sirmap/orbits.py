"""Orbit iteration, attractor characterization, and sweep drivers.

Everything here works on the exact map, one step at a time.  The three
verdicts an orbit can earn are an integer period, "quasiperiodic" (the
samples trace a closed curve), or "aperiodic"; divergence and NaN are
handled separately.  The population-contraction identity

    (x + y + z) - N  ->  (1 - beta) * ((x + y + z) - N)

is exact for the map, so it doubles as an integrity check: it is
re-verified every thousand steps along every computed orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import model
from .errors import DomainError, NumericalBlowupError, SirmapError
from .model import Params, State3

DIVERGENCE_FACTOR = 1e6
DEFAULT_TRANSIENT = 10_000
DEFAULT_KEEP = 512
_CONTRACTION_STRIDE = 1000
_CONTRACTION_TOL = 1e-9

PeriodVerdict = Union[int, str]


@dataclass(frozen=True)
class OrbitSummary:
    """What became of one orbit."""

    samples: np.ndarray
    period: PeriodVerdict
    rotation_number: Optional[float]
    max_norm: float
    diverged_at: Optional[int] = None

    @property
    def locked_fraction(self) -> Optional[Fraction]:
        if self.rotation_number is None:
            return None
        return lock_fraction(self.rotation_number)


def _check_contraction(p: Params, excess0: float, excess_now: float, step: int) -> None:
    expected = (1.0 - p.beta) ** step * excess0
    if abs(excess_now - expected) > _CONTRACTION_TOL * (p.N + abs(expected)):
        raise NumericalBlowupError(
            f"population contraction identity violated at step {step}: "
            f"excess {excess_now:.3e}, expected {expected:.3e}",
            step=step,
        )


def iterate(
    p: Params,
    s0: State3,
    n_transient: int = DEFAULT_TRANSIENT,
    n_keep: int = DEFAULT_KEEP,
    recurrence_tol: Optional[float] = None,
) -> OrbitSummary:
    """Run the map and summarize where the orbit settles.

    Divergence is declared when the state norm exceeds 1e6 * N; a NaN
    raises immediately with the offending step index.  The retained
    samples (post-transient) feed period detection, and a rotation
    number is attached whenever the orbit circulates around an
    existing endemic point.
    """
    if n_transient < 0 or n_keep < 0:
        raise DomainError("n_transient and n_keep must be non-negative")
    if recurrence_tol is None:
        recurrence_tol = 1e-8 * p.N
    bound = DIVERGENCE_FACTOR * p.N
    x, y, z = float(s0[0]), float(s0[1]), float(s0[2])
    excess0 = (x + y + z) - p.N
    max_norm = math.sqrt(x * x + y * y + z * z)
    kept = np.empty((n_keep, 3))
    total = n_transient + n_keep
    for step in range(1, total + 1):
        x, y, z = model.map_step(p, (x, y, z))
        if math.isnan(x) or math.isnan(y) or math.isnan(z):
            raise NumericalBlowupError(f"state became NaN at step {step}", step=step)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm > max_norm:
            max_norm = norm
        if norm > bound:
            return OrbitSummary(
                samples=kept[: max(0, step - 1 - n_transient)].copy(),
                period="diverged",
                rotation_number=None,
                max_norm=max_norm,
                diverged_at=step,
            )
        if step % _CONTRACTION_STRIDE == 0:
            _check_contraction(p, excess0, (x + y + z) - p.N, step)
        if step > n_transient:
            kept[step - n_transient - 1] = (x, y, z)
    period: PeriodVerdict
    if n_keep >= 4:
        period = detect_period(kept, tol=recurrence_tol)
    else:
        period = "undecided"
    rho: Optional[float] = None
    if period == "quasiperiodic" or (isinstance(period, int) and period >= 2):
        rot_samples = kept
        if isinstance(period, int):
            # Use whole cycles only: a trailing partial cycle biases the
            # mean winding by up to period/(2*n_keep), which is already
            # enough to push a locked orbit outside the lock tolerance.
            whole = (len(kept) - 1) // period * period
            rot_samples = kept[: whole + 1]
        try:
            rho = rotation_number(p, rot_samples)
        except (DomainError, SirmapError):
            rho = None
    return OrbitSummary(
        samples=kept,
        period=period,
        rotation_number=rho,
        max_norm=max_norm,
    )


def detect_period(
    samples: np.ndarray,
    tol: float,
    max_period: Optional[int] = None,
) -> PeriodVerdict:
    """Smallest recurrence period of the sample block, or a curve verdict.

    A period m requires every lag-m pair to agree within tol, so a
    decaying transient cannot fake a shorter period than it has.  When
    no lag recurs, the samples are called "quasiperiodic" if they lie
    densely on a closed curve (checked by sorting them by angle in
    their principal plane and requiring the radius to vary smoothly),
    and "aperiodic" otherwise.
    """
    samples = np.asarray(samples, dtype=float)
    k = len(samples)
    if max_period is None:
        max_period = k // 2
    if k < 2 * max_period:
        raise DomainError(
            f"need at least {2 * max_period} samples to test periods up to "
            f"{max_period}, got {k}"
        )
    for m in range(1, max_period + 1):
        gap = np.abs(samples[m:] - samples[:-m]).max()
        if gap < tol:
            return m
    return "quasiperiodic" if _traces_closed_curve(samples) else "aperiodic"


def _traces_closed_curve(samples: np.ndarray) -> bool:
    pts = samples - samples.mean(axis=0)
    scale = np.abs(pts).max()
    if scale < 1e-300:
        return False
    _, _, vt = np.linalg.svd(pts, full_matrices=False)
    uv = pts @ vt[:2].T
    radius = np.hypot(uv[:, 0], uv[:, 1])
    if radius.min() < 1e-9 * scale:
        return False
    # A slowly converging spiral fills an annulus the same way a genuine
    # invariant curve does; what distinguishes it is a radius trend in
    # time order, which an attractor cannot have.
    half = len(radius) // 2
    drift = radius[half:].mean() / max(radius[:half].mean(), 1e-300)
    if not 0.95 <= drift <= 1.05:
        return False
    order = np.argsort(np.arctan2(uv[:, 1], uv[:, 0]))
    r_sorted = radius[order]
    hops = np.abs(np.diff(np.concatenate([r_sorted, r_sorted[:1]])))
    spread = float(r_sorted.max() - r_sorted.min())
    if spread < 1e-6 * float(radius.mean()):
        return True
    return float(np.median(hops)) < 0.05 * spread


def _planar_coordinate(p: Params, samples: np.ndarray, center: State3) -> np.ndarray:
    block = model.planar_block_E2(p)
    if model.planar_discriminant(p) >= 0:
        raise DomainError(
            "multipliers are real at these parameters; no rotation plane"
        )
    ms = model.multipliers_E2(p)
    q1 = (ms.t1 - block[1, 1]) / block[1, 0]
    u = samples[:, 0] - center[0]
    v = samples[:, 1] - center[1]
    return (u - np.conj(q1) * v) / (q1 - np.conj(q1))


def rotation_number(
    p: Params,
    samples: np.ndarray,
    center: Optional[State3] = None,
) -> float:
    """Mean rotation per step around the endemic point, in turns.

    The samples are projected onto the planar eigencoordinate of the
    complex multiplier pair, which removes the decoupled 1-beta
    direction exactly; the winding of that complex coordinate is then
    unwrapped and averaged.
    """
    samples = np.asarray(samples, dtype=float)
    if len(samples) < 2:
        raise DomainError("need at least two samples to estimate rotation")
    if center is None:
        center = model.endemic_point(p)
    w = _planar_coordinate(p, samples, center)
    moduli = np.abs(w)
    if moduli.min() < 1e-12 * p.N:
        raise DomainError("samples collapse onto the center; rotation undefined")
    angles = np.unwrap(np.angle(w))
    return float((angles[-1] - angles[0]) / (2.0 * math.pi * (len(samples) - 1)))


def lock_fraction(rho: float, max_q: int = 50, tol: float = 1e-4) -> Optional[Fraction]:
    """Nearest rational p/q with q <= max_q, if within tol of rho."""
    frac = Fraction(rho).limit_denominator(max_q)
    if abs(rho - float(frac)) <= tol:
        return frac
    return None


@dataclass(frozen=True)
class SweepRecord:
    """Outcome at one parameter value of a bifurcation sweep."""

    value: float
    period: PeriodVerdict
    samples: np.ndarray
    max_norm: float
    error: Optional[str] = None


def sweep_bifurcation(
    p: Params,
    param_name: str,
    value_range: tuple[float, float],
    steps: int,
    seed_policy: str = "inherit",
    s0: Optional[State3] = None,
    n_transient: int = DEFAULT_TRANSIENT,
    n_keep: int = DEFAULT_KEEP,
    recurrence_tol: Optional[float] = None,
    refine_transitions: bool = True,
) -> list[SweepRecord]:
    """March one parameter across a range and record each attractor.

    With seed_policy "inherit" the previous attractor's final state
    seeds the next run, which tracks a cascade the way the published
    diagrams do; "fixed" restarts from s0 every time.  Errors at a
    point are captured in that record rather than aborting the sweep.

    Near a period-doubling onset the inherited seed sits almost exactly
    on the weakly repelling state it just left, and critical slowing
    makes the default transient useless there.  Points flanking any
    period change where an integer period is involved are therefore
    re-run with a long transient and a small deterministic kick off the
    inherited state, which settles the orbit onto the true attractor.
    """
    if steps < 2:
        raise DomainError(f"sweep needs at least 2 steps, got {steps}")
    if param_name not in ("alpha", "beta", "r", "N"):
        raise DomainError(f"unknown parameter {param_name!r}")
    if seed_policy not in ("inherit", "fixed"):
        raise DomainError(f"unknown seed policy {seed_policy!r}")
    values = np.linspace(value_range[0], value_range[1], steps)
    if s0 is None:
        s0 = _default_seed(replace(p, **{param_name: float(values[0])}))
    records: list[SweepRecord] = []
    seed_state: State3 = s0
    for value in values:
        p_here = replace(p, **{param_name: float(value)})
        records.append(
            _sweep_point(p_here, float(value), seed_state, n_transient, n_keep, recurrence_tol)
        )
        last = records[-1]
        if seed_policy == "inherit" and last.error is None and len(last.samples):
            seed_state = tuple(last.samples[-1])
        elif seed_policy == "fixed":
            seed_state = s0
    if refine_transitions:
        _refine_period_transitions(
            p, param_name, records, n_transient, n_keep, recurrence_tol
        )
    return records


def _sweep_point(
    p: Params,
    value: float,
    seed: State3,
    n_transient: int,
    n_keep: int,
    recurrence_tol: Optional[float] = None,
) -> SweepRecord:
    try:
        summary = iterate(
            p, seed, n_transient=n_transient, n_keep=n_keep, recurrence_tol=recurrence_tol
        )
    except SirmapError as exc:
        return SweepRecord(
            value=value,
            period="error",
            samples=np.empty((0, 3)),
            max_norm=math.nan,
            error=str(exc),
        )
    return SweepRecord(
        value=value,
        period=summary.period,
        samples=summary.samples,
        max_norm=summary.max_norm,
    )


_REFINE_TRANSIENT_FLOOR = 120_000


def _refine_period_transitions(
    p: Params,
    param_name: str,
    records: list[SweepRecord],
    n_transient: int,
    n_keep: int,
    recurrence_tol: Optional[float] = None,
) -> None:
    redo: set[int] = set()
    for i in range(1, len(records)):
        a, b = records[i - 1], records[i]
        if a.error or b.error or a.period == b.period:
            continue
        # Only re-run around changes involving a definite period; a
        # chaotic band flickering between aperiodic and diverged is not
        # an onset worth sharpening.
        if isinstance(a.period, int) or isinstance(b.period, int):
            redo.update((i - 1, i))
    kick = 1e-3 * p.N
    for j in sorted(redo):
        rec = records[j]
        if not len(rec.samples):
            continue
        seed = tuple(rec.samples[-1])
        seed = (seed[0] + kick, seed[1] + kick, seed[2])
        p_here = replace(p, **{param_name: rec.value})
        records[j] = _sweep_point(
            p_here,
            rec.value,
            seed,
            max(20 * n_transient, _REFINE_TRANSIENT_FLOOR),
            n_keep,
            recurrence_tol,
        )


def _default_seed(p: Params) -> State3:
    try:
        base = model.endemic_point(p)
    except DomainError:
        base = (p.N, 0.0, 0.0)
    return (base[0] * (1.0 + 1e-3) + 1e-6, base[1] + 1e-3, base[2] + 1e-3)


# --- invariant-circle probing ---------------------------------------------

SEED_FATES = ("fixed_point", "circle", "diverged", "escaping", "undecided")


@dataclass(frozen=True)
class CircleProbe:
    """Joint verdict from an inner and an outer seed."""

    inner_fate: str
    outer_fate: str
    verdict: str


def _radius_measure(p: Params):
    """Return (center, radius function) for fate classification.

    When the endemic multipliers form a complex pair the radius is the
    modulus of the planar eigencoordinate (plus the decoupled z
    deviation), which to linear order changes monotonically by |t1| per
    step; the raw Euclidean distance wobbles with the phase of the
    rotating ellipse by the aspect ratio of the eigenbasis, which near
    a Neimark-Sacker locus can exceed the contraction accumulated over
    the whole run.  Falls back to Euclidean distance from the relevant
    fixed point.
    """
    try:
        center = model.endemic_point(p)
    except DomainError:
        center = (p.N, 0.0, 0.0)
        return center, None
    if model.planar_discriminant(p) >= 0:
        return center, None
    block = model.planar_block_E2(p)
    q1 = (model.multipliers_E2(p).t1 - block[1, 1]) / block[1, 0]
    q1c = q1.conjugate()
    denom = q1 - q1c

    def radius(x: float, y: float, z: float) -> float:
        w = ((x - center[0]) - q1c * (y - center[1])) / denom
        return math.hypot(abs(w), z - center[2])

    return center, radius


def seed_fate(
    p: Params,
    s0: State3,
    horizon: int = 100_000,
    checkpoints: int = 200,
) -> str:
    """Fate of one seed within the horizon.

    One of "fixed_point" (radius from the endemic point still shrinking
    at the end of the run), "circle" (radius settled at a level clear
    of zero), "diverged" (norm blowup at some step), "escaping" (radius
    still growing at the end of the run, after at least an e-fold of
    net expansion), or "undecided".  The verdict comes from the trend
    of log-radius over the last stretch of checkpoints rather than from
    absolute thresholds, because near a Neimark-Sacker locus the linear
    rates are weak enough that 1e5 steps change the radius by barely an
    order of magnitude.
    """
    center, radius = _radius_measure(p)
    bound = DIVERGENCE_FACTOR * p.N
    stride = max(horizon // checkpoints, 1)
    x, y, z = float(s0[0]), float(s0[1]), float(s0[2])
    excess0 = (x + y + z) - p.N
    radii: list[float] = []
    for step in range(1, horizon + 1):
        x, y, z = model.map_step(p, (x, y, z))
        if math.isnan(x) or math.isnan(y) or math.isnan(z):
            return "diverged"
        if math.sqrt(x * x + y * y + z * z) > bound:
            return "diverged"
        if step % _CONTRACTION_STRIDE == 0:
            _check_contraction(p, excess0, (x + y + z) - p.N, step)
        if step % stride == 0:
            if radius is not None:
                radii.append(radius(x, y, z))
            else:
                dx, dy, dz = x - center[0], y - center[1], z - center[2]
                radii.append(math.sqrt(dx * dx + dy * dy + dz * dz))
    n = len(radii)
    if n < 15:
        return "undecided"
    tail = radii[int(n * 0.6) :]
    head_level = float(np.median(radii[:5]))
    tail_start = float(np.median(tail[:5]))
    tail_end = float(np.median(tail[-5:]))
    if tail_end < 1e-9 * p.N:
        return "fixed_point"
    tiny = 1e-300
    trend = math.log(max(tail_end, tiny) / max(tail_start, tiny))
    total = math.log(max(tail_end, tiny) / max(head_level, tiny))
    if trend < -0.4 and total < -0.4:
        return "fixed_point"
    if trend > 0.4 and total > 0.7:
        return "escaping"
    if abs(trend) <= 0.4 and tail_end > 1e-7 * p.N:
        return "circle"
    return "undecided"


_PROBE_VERDICTS = {
    ("fixed_point", "diverged"): "unstable",
    ("fixed_point", "escaping"): "unstable",
    ("circle", "circle"): "stable",
    ("circle", "diverged"): "outside-unstable/inside-stable",
    ("circle", "escaping"): "outside-unstable/inside-stable",
    ("fixed_point", "circle"): "outside-stable/inside-unstable",
    ("fixed_point", "fixed_point"): "no circle",
}


def probe_invariant_circle(
    p: Params,
    inner_seed: State3,
    outer_seed: State3,
    horizon: int = 100_000,
) -> CircleProbe:
    """Classify invariant-circle stability from a seed on each side.

    An unstable circle shows up as inner -> fixed point with outer ->
    infinity; a stable one catches both seeds.  Mixed outcomes indicate
    nested circle pairs; anything the horizon cannot settle is
    reported as inconclusive rather than guessed.
    """
    inner = seed_fate(p, inner_seed, horizon)
    outer = seed_fate(p, outer_seed, horizon)
    verdict = _PROBE_VERDICTS.get((inner, outer), "inconclusive")
    return CircleProbe(inner_fate=inner, outer_fate=outer, verdict=verdict)
