"""Numerical oracle: integrate planar systems and detect limit cycles.

Integration uses the Dormand-Prince 5(4) embedded pair with Hairer's
continuous extension for event location. Cycles are found from successive
crossings of the half-line ``{xi' = 0, xi > 0}``; unstable cycles are caught
by integrating the time-reversed field, under which they become attracting.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Sequence

from scipy.optimize import brentq

from .cycles import CycleReport, Stability
from .errors import NonFiniteState, StepUnderflow
from .polycore import BiPoly
from .reduction import KineticSystem, LLSSystem, ReductionMap, build_reduction_map, reduce_to_lls

log = logging.getLogger(__name__)


class Direction(str, Enum):
    FORWARD = "Forward"
    REVERSED = "TimeReversed"


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
      -10690763975 / 1880347072, 701980252875 / 199316789632,
      -1453857185 / 822651844, 69997945 / 29380423)


def _compile(p: BiPoly) -> Callable[[float, float], float]:
    terms = [(i, j, float(c)) for (i, j), c in p.terms.items()]
    if not terms:
        return lambda x, y: 0.0
    di = max(i for i, _, _ in terms)
    dj = max(j for _, j, _ in terms)

    def ev(x: float, y: float) -> float:
        xp = [1.0] * (di + 1)
        for k in range(1, di + 1):
            xp[k] = xp[k - 1] * x
        yp = [1.0] * (dj + 1)
        for k in range(1, dj + 1):
            yp[k] = yp[k - 1] * y
        return sum(c * xp[i] * yp[j] for i, j, c in terms)

    return ev


@dataclass(frozen=True, eq=False)
class PlanarField:
    """Vector field plus the coordinates ``(xi, xi')`` used for the section."""

    rhs: Callable[[float, float], tuple[float, float]]
    to_section: Callable[[float, float], tuple[float, float]]
    from_section: Callable[[float, float], tuple[float, float]]
    omega: float
    label: str = ""

    @classmethod
    def from_lls(cls, lls: LLSSystem) -> "PlanarField":
        acc = _compile(lls.rhs)
        omega_sq = -float(lls.a(1, 0))
        return cls(
            lambda x, v: (v, acc(x, v)),
            lambda x, v: (x, v),
            lambda xi, v: (xi, v),
            math.sqrt(omega_sq) if omega_sq > 0 else 1.0,
            "lls",
        )

    @classmethod
    def from_kinetic(cls, sys: KineticSystem, rmap: ReductionMap, omega: float) -> "PlanarField":
        a0, a1, a2 = (float(v) for v in sys.a)
        b0, b1, b2 = (float(v) for v in sys.b)
        f, g = _compile(sys.f), _compile(sys.g)
        be0, be1, be2 = float(rmap.beta0), float(rmap.beta1), float(rmap.beta2)
        al0, al1, al2 = float(rmap.alpha0), float(rmap.alpha1), float(rmap.alpha2)
        c1, c2, c3, c4 = (float(rmap.c1), float(rmap.c2), float(rmap.c3), float(rmap.c4))
        cL, cK = float(rmap.cL), float(rmap.cK)
        return cls(
            lambda x, y: (a0 + a1 * x + a2 * y + f(x, y), b0 + b1 * x + b2 * y + g(x, y)),
            lambda x, y: (be0 + be1 * x + be2 * y, al0 + al1 * x + al2 * y),
            lambda xi, u: (c1 * xi + c2 * u + cL, c3 * xi + c4 * u + cK),
            omega,
            "kinetic",
        )


def as_field(system) -> PlanarField:
    if isinstance(system, PlanarField):
        return system
    if isinstance(system, LLSSystem):
        return PlanarField.from_lls(system)
    if isinstance(system, KineticSystem):
        raise TypeError("a KineticSystem needs a fixed point; use kinetic_field()")
    raise TypeError(f"cannot integrate {type(system).__name__}")


def kinetic_field(sys: KineticSystem, fixed_point) -> PlanarField:
    """Field of the original 2-D system observed through its LLS coordinates."""
    from .reduction import FixedPointInfo, fixed_point_info

    fp = fixed_point if isinstance(fixed_point, FixedPointInfo) else fixed_point_info(sys, *fixed_point)
    rmap = build_reduction_map(sys, fp)
    lls = reduce_to_lls(sys, fp, rmap)
    omega_sq = -float(lls.a(1, 0))
    return PlanarField.from_kinetic(sys, rmap, math.sqrt(omega_sq) if omega_sq > 0 else 1.0)


@dataclass(frozen=True)
class SimSpec:
    system: object
    initial: tuple[float, float]
    t_max: float
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        for tol in (self.rel_tol, self.abs_tol):
            if not 0 < tol <= 1e-2:
                raise ValueError("tolerances must lie in (0, 1e-2]")


@dataclass(frozen=True)
class _Step:
    t0: float
    h: float
    y0: tuple[float, float]
    y1: tuple[float, float]
    rcont: tuple  # five coefficient pairs of the continuous extension

    def __call__(self, t: float) -> tuple[float, float]:
        th = (t - self.t0) / self.h
        th1 = 1.0 - th
        r1, r2, r3, r4, r5 = self.rcont
        return tuple(
            r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))) for i in (0, 1)
        )


def _dopri_steps(
    fld: PlanarField, y0, t_max: float, rtol: float, atol: float, sign: float,
) -> Iterator[_Step]:
    """Yield accepted steps; time is always counted forward, ``sign`` flips the field."""
    rhs = fld.rhs
    a21 = _A[1][0]
    a31, a32 = _A[2]
    a41, a42, a43 = _A[3]
    a51, a52, a53, a54 = _A[4]
    a61, a62, a63, a64, a65 = _A[5]
    a71, _, a73, a74, a75, a76 = _A[6]
    e1, _, e3, e4, e5, e6, e7 = _E
    d1, _, d3, d4, d5, d6, d7 = _D

    def fun(p, q):
        dp, dq = rhs(p, q)
        return sign * dp, sign * dq

    t = 0.0
    p, q = float(y0[0]), float(y0[1])
    k1p, k1q = fun(p, q)
    s0, s1 = atol + rtol * abs(p), atol + rtol * abs(q)
    n0 = math.hypot(p / s0, q / s1) / math.sqrt(2)
    n1 = math.hypot(k1p / s0, k1q / s1) / math.sqrt(2)
    h = 1e-6 if n0 < 1e-5 or n1 < 1e-5 else 0.01 * n0 / n1
    h = min(h, 0.1, t_max)
    hmin = 1e-14 * t_max
    while t < t_max:
        h = min(h, t_max - t)
        if h < hmin:
            raise StepUnderflow(f"step {h:.3g} below {hmin:.3g} at t={t:.6g}")
        k2p, k2q = fun(p + h * a21 * k1p, q + h * a21 * k1q)
        k3p, k3q = fun(p + h * (a31 * k1p + a32 * k2p), q + h * (a31 * k1q + a32 * k2q))
        k4p, k4q = fun(p + h * (a41 * k1p + a42 * k2p + a43 * k3p),
                       q + h * (a41 * k1q + a42 * k2q + a43 * k3q))
        k5p, k5q = fun(p + h * (a51 * k1p + a52 * k2p + a53 * k3p + a54 * k4p),
                       q + h * (a51 * k1q + a52 * k2q + a53 * k3q + a54 * k4q))
        k6p, k6q = fun(p + h * (a61 * k1p + a62 * k2p + a63 * k3p + a64 * k4p + a65 * k5p),
                       q + h * (a61 * k1q + a62 * k2q + a63 * k3q + a64 * k4q + a65 * k5q))
        # last stage sits at the 5th-order solution (FSAL)
        pn = p + h * (a71 * k1p + a73 * k3p + a74 * k4p + a75 * k5p + a76 * k6p)
        qn = q + h * (a71 * k1q + a73 * k3q + a74 * k4q + a75 * k5q + a76 * k6q)
        k7p, k7q = fun(pn, qn)
        if not (math.isfinite(pn) and math.isfinite(qn) and math.isfinite(k7p) and math.isfinite(k7q)):
            if h <= hmin * 10:
                raise NonFiniteState(f"non-finite state at t={t:.6g}")
            h *= 0.2
            continue
        ep = h * (e1 * k1p + e3 * k3p + e4 * k4p + e5 * k5p + e6 * k6p + e7 * k7p)
        eq = h * (e1 * k1q + e3 * k3q + e4 * k4q + e5 * k5q + e6 * k6q + e7 * k7q)
        ep /= atol + rtol * max(abs(p), abs(pn))
        eq /= atol + rtol * max(abs(q), abs(qn))
        err = math.sqrt(0.5 * (ep * ep + eq * eq))
        if err <= 1.0:
            r2 = (pn - p, qn - q)
            r3 = (h * k1p - r2[0], h * k1q - r2[1])
            r4 = (r2[0] - h * k7p - r3[0], r2[1] - h * k7q - r3[1])
            r5 = (h * (d1 * k1p + d3 * k3p + d4 * k4p + d5 * k5p + d6 * k6p + d7 * k7p),
                  h * (d1 * k1q + d3 * k3q + d4 * k4q + d5 * k5q + d6 * k6q + d7 * k7q))
            yield _Step(t, h, (p, q), (pn, qn), ((p, q), r2, r3, r4, r5))
            t += h
            p, q = pn, qn
            k1p, k1q = k7p, k7q
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac


@dataclass
class Trajectory:
    """Accepted steps of one integration; ``times`` are in the integration direction."""

    steps: list[_Step]
    direction: Direction = Direction.FORWARD

    @property
    def samples(self) -> list[tuple[float, tuple[float, float]]]:
        if not self.steps:
            return []
        out = [(self.steps[0].t0, self.steps[0].y0)]
        out.extend((s.t0 + s.h, s.y1) for s in self.steps)
        return out

    def __call__(self, t: float) -> tuple[float, float]:
        lo, hi = 0, len(self.steps) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.steps[mid].t0 + self.steps[mid].h < t:
                lo = mid + 1
            else:
                hi = mid
        return self.steps[lo](t)

    @property
    def final(self) -> tuple[float, float]:
        return self.steps[-1].y1


def integrate(spec: SimSpec) -> Trajectory:
    """Adaptive Dormand-Prince integration up to ``spec.t_max``.

    ``TimeReversed`` integrates the negated field; time stamps still run from 0
    to ``t_max``.
    """
    fld = as_field(spec.system)
    sign = -1.0 if spec.direction == Direction.REVERSED else 1.0
    steps = list(_dopri_steps(fld, spec.initial, spec.t_max, spec.rel_tol, spec.abs_tol, sign))
    return Trajectory(steps, spec.direction)


@dataclass(frozen=True)
class DetectSettings:
    rel_tol: float = 1e-6  # convergence of successive section amplitudes
    window: int = 5
    max_crossings: int = 2000
    integ_rtol: float = 1e-10
    integ_atol: float = 1e-12
    t_max: float = 1e6
    directions: tuple[Direction, ...] = (Direction.FORWARD, Direction.REVERSED)
    escape_radius: float = 1e6
    collapse_ratio: float = 1e-3  # stop once amplitude < collapse_ratio * seed
    stall_periods: float = 50.0
    dedup_rtol: float = 1e-3
    event_tol: float = 1e-10


@dataclass(frozen=True)
class DetectedCycle:
    amplitude: float  # xi at the section, i.e. max xi over the orbit
    radius_proxy: float  # time-mean of sqrt(xi^2 + xi'^2/omega^2) over the last period
    period: float
    stability: Stability
    converged: bool
    seed: float = 0.0
    direction: Direction = Direction.FORWARD
    crossings: int = 0
    note: str = ""
    trace: tuple = field(default=(), compare=False, repr=False)  # (t, state) samples when recorded


def _poincare_run(
    fld: PlanarField, seed: float, direction: Direction, st: DetectSettings, record: bool = False,
) -> DetectedCycle:
    sign = -1.0 if direction == Direction.REVERSED else 1.0
    stab = Stability.STABLE if direction == Direction.FORWARD else Stability.UNSTABLE
    y0 = fld.from_section(seed, 0.0)
    sec = fld.to_section
    omega = fld.omega
    amps: list[float] = []
    times: list[float] = []
    proxies: list[float] = []
    acc_int = 0.0
    streak = 0
    last_cross_t = 0.0
    stall = st.stall_periods * 2 * math.pi / omega
    trace: list[tuple[float, tuple[float, float]]] = [(0.0, tuple(y0))] if record else []

    def result(converged: bool, note: str) -> DetectedCycle:
        amp = amps[-1] if amps else float("nan")
        per = times[-1] - times[-2] if len(times) >= 2 else float("nan")
        prox = proxies[-1] if proxies else float("nan")
        return DetectedCycle(amp, prox, per, stab, converged, seed, direction, len(amps), note,
                             tuple(trace))

    try:
        for stp in _dopri_steps(fld, y0, st.t_max, st.integ_rtol, st.integ_atol, sign):
            if record:
                trace.append((stp.t0 + stp.h, stp.y1))
            xi0, v0 = sec(*stp.y0)
            xi1, v1 = sec(*stp.y1)
            r0 = math.sqrt(xi0 * xi0 + v0 * v0 / (omega * omega))
            r1 = math.sqrt(xi1 * xi1 + v1 * v1 / (omega * omega))
            crossed = v0 != 0 and (v0 > 0) != (v1 > 0) or (v1 == 0 and v0 != 0)
            if crossed:
                def vel(t):
                    return sec(*stp(t))[1]
                tc = stp.t0 + stp.h if v1 == 0 else brentq(vel, stp.t0, stp.t0 + stp.h, xtol=st.event_tol)
                xc, _ = sec(*stp(tc))
                if xc > 0:
                    # split the trapezoid segment at the crossing
                    frac = (tc - stp.t0) / stp.h
                    rc = math.sqrt(xc * xc)
                    acc_int += 0.5 * (r0 + rc) * frac * stp.h
                    if times:
                        proxies.append(acc_int / (tc - times[-1]))
                    acc_int = 0.5 * (rc + r1) * (1 - frac) * stp.h
                    amps.append(xc)
                    times.append(tc)
                    last_cross_t = tc
                    if len(amps) >= 2:
                        if abs(amps[-1] - amps[-2]) < st.rel_tol * abs(amps[-1]):
                            streak += 1
                        else:
                            streak = 0
                    if streak >= st.window:
                        # closed orbits through every seed: no attraction was observed
                        if all(abs(a - seed) <= st.rel_tol * seed for a in amps):
                            return result(False, "NoConvergence: neutral orbit (center-type)")
                        return result(True, "")
                    if len(amps) >= st.max_crossings:
                        return result(False, "NoConvergence: crossing cap reached")
                    if xc < st.collapse_ratio * seed:
                        return result(False, "NoConvergence: collapsed onto the fixed point")
                    continue
            acc_int += 0.5 * (r0 + r1) * stp.h
            if max(abs(stp.y1[0]), abs(stp.y1[1])) > st.escape_radius:
                return result(False, "NoConvergence: escaped to infinity")
            if stp.t0 + stp.h - last_cross_t > stall:
                return result(False, "NoConvergence: no section crossings (non-oscillatory)")
    except (StepUnderflow, NonFiniteState) as exc:
        return result(False, f"NoConvergence: {type(exc).__name__}: {exc}")
    return result(False, "NoConvergence: t_max reached")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CYCLEKIT_THREADS", "1")))
    except ValueError:
        return 1


def run_seeds(
    system, seed_radii: Sequence[float], settings: DetectSettings = DetectSettings(),
    record: bool = False,
) -> list[DetectedCycle]:
    """One Poincare run per seed and direction, in input order."""
    fld = as_field(system)
    for s in seed_radii:
        if not (s > 0 and math.isfinite(s)):
            raise ValueError(f"seed radii must be positive (got {s})")
    jobs = [(s, d) for s in seed_radii for d in settings.directions]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda j: _poincare_run(fld, j[0], j[1], settings, record), jobs))


def detect_limit_cycles(
    system, seed_radii: Sequence[float], settings: DetectSettings = DetectSettings(),
) -> list[DetectedCycle]:
    """Run every seed in every configured direction.

    Returns the distinct converged cycles sorted by amplitude, followed by one
    entry per run that did not converge (``converged=False``).
    """
    return summarize_runs(run_seeds(system, seed_radii, settings), settings)


def summarize_runs(runs: Sequence[DetectedCycle], settings: DetectSettings = DetectSettings()):
    """Deduplicate converged runs; keep failed runs after them."""
    unique: list[DetectedCycle] = []
    failed = []
    for r in runs:
        if not r.converged:
            log.info("seed %g (%s): %s", r.seed, r.direction.value, r.note)
            failed.append(r)
            continue
        if any(u.stability == r.stability
               and abs(u.amplitude - r.amplitude) <= settings.dedup_rtol * max(u.amplitude, r.amplitude)
               for u in unique):
            continue
        unique.append(r)
    unique.sort(key=lambda c: c.amplitude)
    return unique + failed


@dataclass(frozen=True)
class Match:
    predicted: float
    detected: float
    rel_error: float
    agree: bool
    stability_agree: bool


@dataclass(frozen=True)
class Comparison:
    matches: tuple[Match, ...]
    unmatched_predicted: tuple[float, ...]
    unmatched_detected: tuple[float, ...]
    threshold: float
    no_convergence: tuple[str, ...] = field(default=())

    @property
    def all_agree(self) -> bool:
        return (not self.unmatched_predicted and not self.unmatched_detected
                and all(m.agree and m.stability_agree for m in self.matches))


def compare_with_kb(report: CycleReport, detected: Sequence[DetectedCycle], eps) -> Comparison:
    """Greedy nearest pairing of predicted radii with detected amplitudes."""
    thr = max(5 * float(eps), 0.05)
    preds = [(float(c.radius), c.stability) for c in report.cycles]
    dets = [d for d in detected if d.converged]
    pairs = sorted(
        ((abs(p - d.amplitude) / p, i, j) for i, (p, _) in enumerate(preds) for j, d in enumerate(dets)),
    )
    used_p, used_d, matches = set(), set(), []
    for rel, i, j in pairs:
        if i in used_p or j in used_d:
            continue
        used_p.add(i)
        used_d.add(j)
        p, ps = preds[i]
        d = dets[j]
        matches.append(Match(p, d.amplitude, rel, rel < thr,
                             ps == Stability.DEGENERATE or ps == d.stability))
    matches.sort(key=lambda m: m.predicted)
    return Comparison(
        tuple(matches),
        tuple(p for i, (p, _) in enumerate(preds) if i not in used_p),
        tuple(d.amplitude for j, d in enumerate(dets) if j not in used_d),
        thr,
        tuple(f"seed {d.seed} {d.direction.value}: {d.note}" for d in detected if not d.converged),
    )
