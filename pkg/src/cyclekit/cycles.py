"""Limit-cycle counting from the averaged radial polynomial.

Positive roots ``rho*`` of ``R(rho)`` are squared radii of averaged limit
cycles; each gives the conjugate pair ``r = +-sqrt(rho*)`` of the odd radial
equation ``dr/dtau = eps*r*R(r**2)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .averaging import AveragedDynamics, RescaledOscillator, _exact_sqrt, kb_average
from .errors import IdenticallyZero
from .polycore import UniPoly, is_exact

log = logging.getLogger(__name__)

ROOT_TOL = 1e-9
ILL_CONDITIONED = 1e8


class Stability(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    DEGENERATE = "Degenerate"


class OriginNature(str, Enum):
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_FOCUS = "UnstableFocus"
    CENTER_TYPE = "CenterType"


class ParityClass(str, Enum):
    EVEN_EVEN = "EvenEven"
    EVEN_ODD = "EvenOdd"
    ODD_EVEN = "OddEven"
    ODD_ODD = "OddOdd"


@dataclass(frozen=True)
class RadialRoot:
    rho: float | Fraction
    multiplicity: int
    condition: float = 1.0

    @property
    def radius(self):
        return _exact_sqrt(self.rho)

    @property
    def exact(self) -> bool:
        return is_exact(self.rho)


@dataclass(frozen=True)
class RootCensus:
    """Where the remaining roots of R(rho) went (reported as metadata)."""

    complex_pairs: int
    nonpositive_real: int
    warnings: tuple[str, ...] = ()


def _rational_guess(x: float, poly: UniPoly) -> Fraction | None:
    """Small-denominator rational at rounding distance from ``x`` that is an exact root."""
    for den in (10**3, 10**6):
        q = Fraction(x).limit_denominator(den)
        if abs(float(q) - x) <= 1e-9 * max(1.0, abs(x)) and poly(q) == 0:
            # a neighbouring root inside the gap means x belongs to that one
            d = 4 * abs(Fraction(x) - q) + Fraction(1, 10**15) * max(1, abs(q))
            if poly.sturm_count(q - d, q + d) == 1:
                return q
    return None


def _newton(poly: UniPoly, x: float, iters: int = 50) -> float:
    dp = poly.derivative()
    exact = poly.is_exact()
    for _ in range(iters):
        # exact residuals avoid cancellation near clustered roots
        at = Fraction(x) if exact else x
        d = float(dp(at))
        if d == 0:
            break
        step = float(poly(at)) / d
        x -= step
        if abs(step) <= 4e-16 * max(1.0, abs(x)):
            break
    return x


def _condition(poly: UniPoly, x: float) -> float:
    num = sum(abs(float(c)) * abs(x) ** k for k, c in enumerate(poly.coeffs))
    den = abs(x) * abs(float(poly.derivative()(x)))
    return math.inf if den == 0 else num / den


def _real_roots_simple(poly: UniPoly, tol: float):
    """Real roots of a square-free polynomial, polished on the exact coefficients."""
    if poly.degree < 1:
        return [], 0, 0
    z = np.roots([float(c) for c in reversed(poly.coeffs)])
    real, cplx = [], 0
    for w in z:
        if abs(w.imag) <= 1e-7 * max(1.0, abs(w)):
            real.append(_newton(poly, float(w.real)))
        else:
            cplx += 1
    pos = sorted(x for x in real if x > tol)
    return pos, cplx // 2, len(real) - len(pos)


def radial_roots(avg: AveragedDynamics, tol: float = ROOT_TOL) -> list[RadialRoot]:
    """Positive roots of ``R(rho)`` with multiplicities, ascending."""
    roots, _ = _roots_and_census(avg.radial_core, tol)
    return roots


def root_census(avg: AveragedDynamics, tol: float = ROOT_TOL) -> RootCensus:
    return _roots_and_census(avg.radial_core, tol)[1]


def _roots_and_census(core: UniPoly, tol: float = ROOT_TOL):
    if core.is_zero():
        raise IdenticallyZero("R(rho) vanishes identically: center at first order")
    out: list[RadialRoot] = []
    cplx = nonpos = 0
    warnings = []
    if core.is_exact():
        for factor, k in core.squarefree_factors():
            pos, c, nn = _real_roots_simple(factor, tol)
            cplx += c * k
            nonpos += nn * k
            expected = factor.sturm_count(Fraction(tol), float("inf"))
            if expected != len(pos):
                warnings.append(
                    f"root isolation found {len(pos)} positive roots, Sturm count says {expected}"
                )
            for x in pos:
                q = _rational_guess(x, factor)
                cond = _condition(factor, x)
                if cond > ILL_CONDITIONED:
                    warnings.append(f"IllConditioned: root rho={x:.12g} has condition {cond:.3g}")
                out.append(RadialRoot(q if q is not None else x, k, cond))
    else:
        z = np.roots([float(c) for c in reversed(core.coeffs)])
        scale = max(1.0, float(np.max(np.abs(z)))) if len(z) else 1.0
        used = [False] * len(z)
        for i, w in enumerate(z):
            if used[i]:
                continue
            cluster = [j for j in range(len(z)) if not used[j] and abs(z[j] - w) < 1e-5 * scale]
            for j in cluster:
                used[j] = True
            centre = complex(np.mean([z[j] for j in cluster]))
            k = len(cluster)
            if abs(centre.imag) > 1e-7 * max(1.0, abs(centre)):
                cplx += k
                continue
            x = centre.real
            if k == 1:
                x = _newton(core, x)
            if x <= tol:
                nonpos += k
                continue
            cond = _condition(core, x) if k == 1 else math.inf
            if k == 1 and cond > ILL_CONDITIONED:
                warnings.append(f"IllConditioned: root rho={x:.12g} has condition {cond:.3g}")
            out.append(RadialRoot(x, k, cond))
        cplx //= 2
    out.sort(key=lambda r: float(r.rho))
    for w in warnings:
        log.warning(w)
    return out, RootCensus(cplx, nonpos, tuple(warnings))


@dataclass(frozen=True)
class ParityBound:
    N: int
    M: int
    parity_class: ParityClass
    max_real_roots: int
    max_cycles: int


def parity_bound(N: int, M: int) -> ParityBound:
    """Maximum number of averaged limit cycles for degrees (N, M)."""
    if N < 1 or M < 1:
        raise ValueError("N and M must be at least 1")
    if N % 2 == 0 and M % 2 == 0:
        cls, roots = ParityClass.EVEN_EVEN, N + M - 2
    elif N % 2 == 0:
        cls, roots = ParityClass.EVEN_ODD, N + M - 1
    elif M % 2 == 0:
        cls, roots = ParityClass.ODD_EVEN, N + M - 3
    else:
        cls, roots = ParityClass.ODD_ODD, N + M - 2
    return ParityBound(N, M, cls, roots, roots // 2)


@dataclass(frozen=True)
class CycleEstimate:
    radius: float | Fraction
    rho: float | Fraction
    multiplicity: int
    stability: Stability
    freq_correction: float | Fraction
    frequency: float  # corrected angular frequency in t-time


@dataclass(frozen=True)
class CycleReport:
    origin_nature: OriginNature
    cycles: tuple[CycleEstimate, ...]
    bound: ParityBound
    saturated: bool
    complex_pairs: int = 0
    nonpositive_real: int = 0
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def radii(self) -> list:
        return [c.radius for c in self.cycles]

    @property
    def stabilities(self) -> list[Stability]:
        return [c.stability for c in self.cycles]


def _stability(core: UniPoly, root: RadialRoot) -> Stability:
    if root.multiplicity % 2 == 0:
        return Stability.DEGENERATE
    d = core
    for _ in range(root.multiplicity):
        d = d.derivative()
    val = d(root.rho)
    # d(r*R(r^2))/dr = 2*rho*R'(rho) at a simple root; eps*omega > 0
    if val == 0:
        return Stability.DEGENERATE
    return Stability.STABLE if val < 0 else Stability.UNSTABLE


def classify_cycles(
    avg: AveragedDynamics,
    roots: list[RadialRoot] | None = None,
    census: RootCensus | None = None,
) -> CycleReport:
    """Stability of each averaged cycle, nature of the origin, and the parity bound.

    A vanishing radial polynomial yields an empty report with a center-type
    origin rather than an error.
    """
    bound = parity_bound(max(avg.N, 1), max(avg.M, 1))
    if avg.radial_core.is_zero():
        return CycleReport(OriginNature.CENTER_TYPE, (), bound, False,
                           warnings=("R(rho) vanishes identically: center at first order",))
    if roots is None or census is None:
        roots, census = _roots_and_census(avg.radial_core)
    c0 = avg.radial_core.coeff(0)
    origin = (OriginNature.UNSTABLE_FOCUS if c0 > 0
              else OriginNature.STABLE_FOCUS if c0 < 0 else OriginNature.CENTER_TYPE)
    cycles = []
    for rt in roots:
        fc = avg.phase(rt.rho)
        cycles.append(CycleEstimate(
            radius=rt.radius,
            rho=rt.rho,
            multiplicity=rt.multiplicity,
            stability=_stability(avg.radial_core, rt),
            freq_correction=fc,
            frequency=float(avg.omega) * (1 + float(avg.eps) * float(fc)),
        ))
    if len(cycles) > bound.max_cycles:
        log.warning("found %d cycles, above the parity bound %d", len(cycles), bound.max_cycles)
    return CycleReport(
        origin, tuple(cycles), bound, len(cycles) == bound.max_cycles,
        census.complex_pairs, census.nonpositive_real, census.warnings,
    )


def count_cycles(osc: RescaledOscillator) -> CycleReport:
    return classify_cycles(kb_average(osc))


def generic_degree_bound(N: int, M: int) -> tuple[int, int]:
    """``(N + M, 2*deg R)`` for a table of independent symbolic coefficients."""
    if N < 1 or M < 1:
        raise ValueError("N and M must be at least 1")
    avg = kb_average(RescaledOscillator.generic(N, M))
    return N + M, 2 * max(avg.radial_core.degree, 0)


def render_table_ii(n_max: int = 10, m_max: int = 10) -> list[list[tuple[int, int]]]:
    """Grid of ``(N + M, R)`` for ``1 <= N <= n_max``, ``1 <= M <= m_max``."""
    if n_max < 1 or m_max < 1:
        raise ValueError("table bounds must be at least 1")
    return [[generic_degree_bound(n, m) for m in range(1, m_max + 1)] for n in range(1, n_max + 1)]


def format_table_text(grid, header: bool = False) -> str:
    cells = [[f"{a},{b}" for a, b in row] for row in grid]
    ncol = len(cells[0]) if cells else 0
    widths = [max(len(row[j]) for row in cells) for j in range(ncol)]
    lines = []
    if header:
        lab = len(str(len(cells)))
        lines.append(" " * lab + " " + " ".join(str(j + 1).ljust(w) for j, w in enumerate(widths)).rstrip())
        for i, row in enumerate(cells):
            lines.append(str(i + 1).rjust(lab) + " " + " ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    else:
        for row in cells:
            lines.append(" ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def format_table_csv(grid) -> str:
    lines = ["N,M,oplus,R"]
    for i, row in enumerate(grid, start=1):
        for j, (a, b) in enumerate(row, start=1):
            lines.append(f"{i},{j},{a},{b}")
    return "\n".join(lines) + "\n"
