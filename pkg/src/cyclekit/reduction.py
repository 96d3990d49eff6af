"""Bring a planar kinetic system into Lienard-Levinson-Smith (LLS) form.

The kinetic system is

    dx/dt = a0 + a1*x + a2*y + f(x, y)
    dy/dt = b0 + b1*x + b2*y + g(x, y),      g = mu * f

and the reduced system is ``xi'' + F(xi, xi') xi' + G(xi) = 0`` around a chosen
fixed point, obtained through the affine change of variables
``xi = beta1*(x - xs) + beta2*(y - ys)``, ``u = xi'``.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateTransform,
    FixedPointNotShifted,
    NoFixedPointFound,
    NotProportional,
    NotReducible,
)
from .polycore import BiPoly, Coeff, UniPoly, as_coeff, format_coeff, is_exact

log = logging.getLogger(__name__)

A00_TOL = 1e-12


def _symbolic(*vals) -> bool:
    """True if any value is a sympy expression with free symbols."""
    return any(bool(getattr(v, "free_symbols", None)) for v in vals)


def _cancel(c):
    import sympy

    return sympy.cancel(sympy.together(c))


class LLSClass(str, Enum):
    GENERAL = "GeneralLLS"
    RAYLEIGH = "Rayleigh"
    LIENARD = "Lienard"


def _proportionality(f: BiPoly, g: BiPoly, rtol: float = 1e-12):
    """Return mu with g = mu*f, 0 when both vanish, None when f = 0 != g."""
    if f.is_zero():
        return Fraction(0) if g.is_zero() else None
    key, fk = max(f.terms.items(), key=lambda kv: abs(complex(kv[1])))
    mu = g.coeff(*key) / fk
    diff = g - f.scale(mu)
    if diff.is_zero():
        return mu
    if not (f.is_exact() and g.is_exact()):
        scale = max(abs(c) for c in list(f.terms.values()) + list(g.terms.values()))
        if all(abs(c) <= rtol * scale for c in diff.terms.values()):
            return mu
    raise NotProportional(
        "the nonlinear parts must satisfy g = mu*f for a constant mu; "
        f"f = {f.format()}, g = {g.format()}"
    )


@dataclass(frozen=True, eq=False)
class KineticSystem:
    """Planar polynomial kinetic system with proportional nonlinear parts.

    Construct with :meth:`with_mu` for the usual ``g = mu*f`` case. Passing
    ``f = 0`` and an arbitrary ``g`` is also accepted (the nonlinearity then
    lives entirely in the second equation).
    """

    a: tuple[Coeff, Coeff, Coeff]
    b: tuple[Coeff, Coeff, Coeff]
    f: BiPoly
    g: BiPoly
    allow_linear: bool = False
    name: str = ""

    def __post_init__(self):
        if len(self.a) != 3 or len(self.b) != 3:
            raise ValueError("a and b need exactly three entries (constant, x, y)")
        object.__setattr__(self, "a", tuple(as_coeff(v) for v in self.a))
        object.__setattr__(self, "b", tuple(as_coeff(v) for v in self.b))
        _proportionality(self.f, self.g)
        if not self.allow_linear:
            for p, label in ((self.f, "f"), (self.g, "g")):
                low = [k for k in p.terms if sum(k) <= 1]
                if low:
                    raise ValueError(
                        f"{label} has constant/linear terms {low}; move them into a/b "
                        "or pass allow_linear=True"
                    )

    @classmethod
    def with_mu(cls, a, b, f: BiPoly, mu, **kw) -> "KineticSystem":
        return cls(a, b, f, f.scale(as_coeff(mu)), **kw)

    @property
    def mu(self):
        """``g/f``; ``None`` when f vanishes but g does not."""
        return _proportionality(self.f, self.g)

    def rhs(self, x, y):
        a0, a1, a2 = self.a
        b0, b1, b2 = self.b
        return (a0 + a1 * x + a2 * y + self.f(x, y), b0 + b1 * x + b2 * y + self.g(x, y))

    def jacobian(self, x, y):
        fx, fy = self.f.derivative(0)(x, y), self.f.derivative(1)(x, y)
        gx, gy = self.g.derivative(0)(x, y), self.g.derivative(1)(x, y)
        return ((self.a[1] + fx, self.a[2] + fy), (self.b[1] + gx, self.b[2] + gy))

    def is_exact(self) -> bool:
        return (
            all(is_exact(v) for v in self.a + self.b)
            and self.f.is_exact()
            and self.g.is_exact()
        )


@dataclass(frozen=True)
class FixedPointInfo:
    xs: Coeff
    ys: Coeff
    jacobian: tuple[tuple[Coeff, Coeff], tuple[Coeff, Coeff]]
    eigenvalues: tuple[complex, complex]
    trace: Coeff
    determinant: Coeff
    residual: float = 0.0
    singular: bool = False

    @property
    def kind(self) -> str:
        tr, det = float(self.trace), float(self.determinant)
        if self.singular:
            return "degenerate"
        if det < 0:
            return "saddle"
        if tr == 0:
            return "center"
        disc = tr * tr - 4 * det
        stab = "stable" if tr < 0 else "unstable"
        return f"{stab} {'focus' if disc < 0 else 'node'}"


def fixed_point_info(sys: KineticSystem, xs, ys, tol: float = 1e-9) -> FixedPointInfo:
    """Characterise a known fixed point; exact if ``xs, ys`` and the system are."""
    xs, ys = as_coeff(xs), as_coeff(ys)
    r1, r2 = sys.rhs(xs, ys)
    if _symbolic(xs, ys, r1, r2):
        return _symbolic_fixed_point(sys, xs, ys, r1, r2)
    residual = float(max(abs(r1), abs(r2)))
    if residual > tol:
        raise FixedPointNotShifted(f"({xs}, {ys}) is not a fixed point: residual {residual:.3g}")
    jac = sys.jacobian(xs, ys)
    tr = jac[0][0] + jac[1][1]
    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
    disc = cmath.sqrt(complex(tr * tr - 4 * det))
    lam = ((complex(tr) + disc) / 2, (complex(tr) - disc) / 2)
    return FixedPointInfo(xs, ys, jac, lam, tr, det, residual, abs(float(det)) < 1e-12)


def _symbolic_fixed_point(sys, xs, ys, r1, r2) -> FixedPointInfo:
    import sympy

    if _cancel(r1) != 0 or _cancel(r2) != 0:
        raise FixedPointNotShifted(f"({xs}, {ys}) is not a fixed point of the symbolic system")
    jac = tuple(tuple(_cancel(c) for c in row) for row in sys.jacobian(xs, ys))
    tr = _cancel(jac[0][0] + jac[1][1])
    det = _cancel(jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0])
    disc = sympy.sqrt(tr * tr - 4 * det)
    return FixedPointInfo(xs, ys, jac, ((tr + disc) / 2, (tr - disc) / 2), tr, det)


def find_fixed_points(
    sys: KineticSystem,
    search_box: Sequence[Sequence[float]] = ((-2.0, 2.0), (-2.0, 2.0)),
    seeds_per_axis: int = 9,
    seed: int | None = 0,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> list[FixedPointInfo]:
    """Locate fixed points inside ``search_box`` by damped Newton from a seed grid.

    ``seed`` jitters the grid (``None`` disables jitter); identical seeds give
    identical results.
    """
    (x0, x1), (y0, y1) = search_box
    if not (x1 > x0 and y1 > y0):
        raise ValueError("search_box must be non-empty")
    if seeds_per_axis < 2:
        raise ValueError("seeds_per_axis must be at least 2")
    fsys = KineticSystem(
        tuple(float(v) for v in sys.a), tuple(float(v) for v in sys.b),
        sys.f.to_float(), sys.g.to_float(), allow_linear=True,
    )
    gx = np.linspace(x0, x1, seeds_per_axis)
    gy = np.linspace(y0, y1, seeds_per_axis)
    seeds = np.array([(u, v) for u in gx for v in gy])
    if seed is not None:
        rng = np.random.default_rng(seed)
        cell = np.array([(x1 - x0), (y1 - y0)]) / (seeds_per_axis - 1)
        seeds = seeds + rng.uniform(-0.25, 0.25, seeds.shape) * cell

    def resid(p):
        return np.array(fsys.rhs(p[0], p[1]), dtype=float)

    found: list[np.ndarray] = []
    for p in seeds:
        p = p.astype(float)
        r = resid(p)
        for _ in range(max_iter):
            if not np.all(np.isfinite(r)):
                break
            if np.max(np.abs(r)) < tol:
                break
            jac = np.array(fsys.jacobian(p[0], p[1]), dtype=float)
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
            lam, n0 = 1.0, np.linalg.norm(r)
            while lam > 1e-6:
                cand = p + lam * step
                rc = resid(cand)
                if np.all(np.isfinite(rc)) and np.linalg.norm(rc) < (1 - 1e-4 * lam) * n0:
                    break
                lam /= 2
            p, r = cand, rc
        else:
            continue
        if not np.all(np.isfinite(r)) or np.max(np.abs(r)) >= max(tol, 1e-10):
            continue
        for _ in range(2):  # plain Newton polish down to rounding level
            jac = np.array(fsys.jacobian(p[0], p[1]), dtype=float)
            cand = p + np.linalg.lstsq(jac, -r, rcond=None)[0]
            rc = resid(cand)
            if not (np.all(np.isfinite(rc)) and np.linalg.norm(rc) < np.linalg.norm(r)):
                break
            p, r = cand, rc
        margin = 1e-9 * (1 + max(abs(x0), abs(x1), abs(y0), abs(y1)))
        if not (x0 - margin <= p[0] <= x1 + margin and y0 - margin <= p[1] <= y1 + margin):
            continue
        if any(np.linalg.norm(p - q) < 1e-7 * (1 + np.linalg.norm(q)) for q in found):
            continue
        found.append(p)
    if not found:
        raise NoFixedPointFound(f"no Newton run converged inside {search_box}")
    found.sort(key=lambda q: (round(q[0], 9), round(q[1], 9)))
    out = []
    for q in found:
        xs = 0.0 if abs(q[0]) < 1e-14 else float(q[0])
        ys = 0.0 if abs(q[1]) < 1e-14 else float(q[1])
        out.append(fixed_point_info(fsys, xs, ys, tol=1e-8))
    return out


@dataclass(frozen=True)
class ReductionMap:
    """Affine map ``(x, y) <-> (xi, u)`` and its inverse ``x = L, y = K``."""

    beta0: Coeff
    beta1: Coeff
    beta2: Coeff
    alpha0: Coeff
    alpha1: Coeff
    alpha2: Coeff
    c1: Coeff
    c2: Coeff
    c3: Coeff
    c4: Coeff
    cL: Coeff
    cK: Coeff
    det: Coeff

    def forward(self, x, y):
        return (self.beta0 + self.beta1 * x + self.beta2 * y,
                self.alpha0 + self.alpha1 * x + self.alpha2 * y)

    def inverse(self, xi, u):
        return (self.c1 * xi + self.c2 * u + self.cL, self.c3 * xi + self.c4 * u + self.cK)

    @property
    def L(self) -> BiPoly:
        return BiPoly({(1, 0): self.c1, (0, 1): self.c2, (0, 0): self.cL})

    @property
    def K(self) -> BiPoly:
        return BiPoly({(1, 0): self.c3, (0, 1): self.c4, (0, 0): self.cK})


def _default_beta(sys: KineticSystem):
    mu = sys.mu
    if mu is None:  # f == 0, g != 0
        return (Fraction(1), Fraction(0))
    return (-mu, Fraction(1))


def _map_from_beta(sys: KineticSystem, fp: FixedPointInfo, beta1, beta2) -> ReductionMap:
    a0, a1, a2 = sys.a
    b0, b1, b2 = sys.b
    beta0 = -(beta1 * fp.xs + beta2 * fp.ys)
    alpha0 = beta1 * a0 + beta2 * b0
    alpha1 = beta1 * a1 + beta2 * b1
    alpha2 = beta1 * a2 + beta2 * b2
    det = alpha1 * beta2 - alpha2 * beta1
    if _symbolic(det):
        det = _cancel(det)
    if det == 0 or (not is_exact(det) and not _symbolic(det) and abs(det) < 1e-14):
        raise DegenerateTransform(
            f"alpha1*beta2 - alpha2*beta1 = 0 for beta = ({beta1}, {beta2})"
        )
    return ReductionMap(
        beta0, beta1, beta2, alpha0, alpha1, alpha2,
        c1=-alpha2 / det,
        c2=beta2 / det,
        c3=alpha1 / det,
        c4=-beta1 / det,
        cL=(alpha2 * beta0 - alpha0 * beta2) / det,
        cK=(alpha0 * beta1 - alpha1 * beta0) / det,
        det=det,
    )


def build_reduction_map(sys: KineticSystem, fp: FixedPointInfo) -> ReductionMap:
    """Choose ``beta2 = 1, beta1 = -mu`` so that ``u = xi'`` stays affine.

    When f vanishes and g does not, ``beta = (1, 0)`` plays the same role. A
    purely linear system leaves beta free; other directions are tried if the
    default one is degenerate.
    """
    beta = _default_beta(sys)
    nonlinear = not (sys.f.is_zero() and sys.g.is_zero())
    try:
        return _map_from_beta(sys, fp, *beta)
    except DegenerateTransform:
        if nonlinear:
            raise NotReducible(
                f"the only beta killing the nonlinearity, ({format_coeff(beta[0])}, {format_coeff(beta[1])}), gives "
                "alpha1*beta2 - alpha2*beta1 = 0"
            ) from None
    for alt in ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)), (Fraction(1), Fraction(1))):
        try:
            return _map_from_beta(sys, fp, *alt)
        except DegenerateTransform:
            continue
    raise DegenerateTransform("no beta gives an invertible linear map")


@dataclass(frozen=True, eq=False)
class LLSSystem:
    """``xi'' = sum A_nm xi^n xi'^m``, i.e. ``xi'' + F xi' + G = 0``.

    ``eigenvalues`` are those of the originating fixed point when known; they
    are otherwise computed from the linear part.
    """

    rhs: BiPoly
    eigenvalues: tuple[complex, complex] | None = None
    reduction_map: ReductionMap | None = field(default=None, compare=False)
    fixed_point: FixedPointInfo | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        a00 = self.rhs.coeff(0, 0)
        if a00 != 0:
            if is_exact(a00) or abs(a00) > A00_TOL:
                raise FixedPointNotShifted(f"A00 = {a00} does not vanish")
            object.__setattr__(self, "rhs", self.rhs - BiPoly.constant(a00))

    @classmethod
    def from_table(cls, A, **kw) -> "LLSSystem":
        return cls(BiPoly(dict(A)), **kw)

    @property
    def A(self) -> dict[tuple[int, int], Coeff]:
        return dict(self.rhs.items())

    def a(self, n: int, m: int) -> Coeff:
        return self.rhs.coeff(n, m)

    @property
    def N(self) -> int:
        return max((n for n, _ in self.rhs.terms), default=0)

    @property
    def M(self) -> int:
        return max((m for _, m in self.rhs.terms), default=0)

    @property
    def F(self) -> BiPoly:
        return BiPoly({(n, m - 1): -c for (n, m), c in self.rhs.terms.items() if m >= 1})

    @property
    def G(self) -> UniPoly:
        coeffs = [Fraction(0)] * (self.N + 1)
        for (n, m), c in self.rhs.terms.items():
            if m == 0:
                coeffs[n] = -c
        return UniPoly(coeffs)

    @property
    def lls_class(self) -> LLSClass:
        """Lienard: damping depends on xi only. Rayleigh: linear restoring force
        and damping depending on xi' only. Lienard wins when both hold."""
        keys = self.rhs.terms.keys()
        if not any(m >= 2 for _, m in keys):
            return LLSClass.LIENARD
        if not any(n >= 2 or (n == 1 and m >= 1) for n, m in keys):
            return LLSClass.RAYLEIGH
        return LLSClass.GENERAL

    def linear_eigenvalues(self) -> tuple[complex, complex]:
        a10, a01 = complex(self.a(1, 0)), complex(self.a(0, 1))
        disc = cmath.sqrt(a01 * a01 + 4 * a10)
        return ((a01 + disc) / 2, (a01 - disc) / 2)

    def is_exact(self) -> bool:
        return self.rhs.is_exact()


def _chop(p: BiPoly, rtol: float = A00_TOL) -> BiPoly:
    if p.is_exact() or p.is_zero():
        return p
    scale = max(1.0, max(abs(float(c)) for c in p.terms.values()))
    return BiPoly({k: c for k, c in p.terms.items() if abs(c) > rtol * scale})


def reduce_to_lls(sys: KineticSystem, fp: FixedPointInfo, rmap: ReductionMap) -> LLSSystem:
    """Assemble the A-table of the LLS form.

    The nonlinear part enters through ``alpha1*f(L, K) + alpha2*g(L, K)``,
    which equals ``(alpha1 + mu*alpha2) * phi`` when ``g = mu*f``.
    """
    a0, a1, a2 = sys.a
    b0, b1, b2 = sys.b
    al1, al2 = rmap.alpha1, rmap.alpha2
    L, K = rmap.L, rmap.K
    psi = sys.f.compose(L, K).scale(al1) + sys.g.compose(L, K).scale(al2)

    a00 = (al1 * a0 + al2 * b0 + psi.coeff(0, 0)
           + (al1 * a1 + al2 * b1) * rmap.cL + (al1 * a2 + al2 * b2) * rmap.cK)
    a10 = al1 * (a1 * rmap.c1 + a2 * rmap.c3) + al2 * (b1 * rmap.c1 + b2 * rmap.c3) + psi.coeff(1, 0)
    a01 = al1 * (a1 * rmap.c2 + a2 * rmap.c4) + al2 * (b1 * rmap.c2 + b2 * rmap.c4) + psi.coeff(0, 1)

    if _symbolic(a00, a10, a01, *psi.terms.values()):
        return _symbolic_lls(sys, fp, rmap, psi, a00, a10, a01)
    scale = max([1.0] + [abs(float(c)) for c in psi.terms.values()])
    if a00 != 0 and (is_exact(a00) or abs(a00) > A00_TOL * scale):
        raise FixedPointNotShifted(
            f"A00 = {a00}: ({fp.xs}, {fp.ys}) is inconsistent with the system"
        )
    table = {k: c for k, c in psi.terms.items() if k not in ((0, 0), (1, 0), (0, 1))}
    table[(1, 0)] = a10
    table[(0, 1)] = a01
    return LLSSystem(
        _chop(BiPoly(table)),
        eigenvalues=fp.eigenvalues,
        reduction_map=rmap,
        fixed_point=fp,
        name=sys.name,
    )


def _symbolic_lls(sys, fp, rmap, psi, a00, a10, a01) -> LLSSystem:
    if _cancel(a00) != 0:
        raise FixedPointNotShifted(f"A00 = {a00} does not vanish identically")
    table = {k: c for k, c in psi.terms.items() if k not in ((0, 0), (1, 0), (0, 1))}
    table[(1, 0)] = a10
    table[(0, 1)] = a01
    return LLSSystem(BiPoly({k: _cancel(c) for k, c in table.items()}), eigenvalues=fp.eigenvalues,
                     reduction_map=rmap, fixed_point=fp, name=sys.name)


@dataclass(frozen=True)
class Classification:
    lls_class: LLSClass
    N: int
    M: int
    F00: Coeff
    F00_sign: int
    eigenvalue_sum: complex
    trace_check: float  # |F(0,0) + (lambda+ + lambda-)|
    limit_cycle_precondition: bool  # F(0,0) < 0

    @property
    def consistent(self) -> bool:
        return self.trace_check <= 1e-10


def classify_lls(lls: LLSSystem) -> Classification:
    """Class tag plus the F(0,0) sign report.

    F(0,0) = -A01 equals minus the trace of the linearisation, i.e.
    ``-2 Re(lambda)`` for a complex pair.
    """
    f00 = -lls.a(0, 1)
    lam = lls.eigenvalues if lls.eigenvalues is not None else lls.linear_eigenvalues()
    s = lam[0] + lam[1]
    sign = (f00 > 0) - (f00 < 0)
    return Classification(
        lls.lls_class, lls.N, lls.M, f00, sign, s,
        abs(complex(f00) + s), f00 < 0,
    )


def select_fixed_point(points: Sequence[FixedPointInfo]) -> FixedPointInfo:
    """Prefer the first non-saddle point; saddles carry no cycles."""
    for p in points:
        if float(p.determinant) > 0:
            return p
    return points[0]


def reduce_system(
    sys: KineticSystem,
    fixed_point=None,
    search_box=((-2.0, 2.0), (-2.0, 2.0)),
    seed: int | None = 0,
) -> LLSSystem:
    """One-shot reduction around ``fixed_point`` (or a searched one)."""
    if fixed_point is None:
        fp = select_fixed_point(find_fixed_points(sys, search_box, seed=seed))
        log.info("using fixed point (%s, %s)", fp.xs, fp.ys)
    elif isinstance(fixed_point, FixedPointInfo):
        fp = fixed_point
    else:
        fp = fixed_point_info(sys, *fixed_point)
    rmap = build_reduction_map(sys, fp)
    return reduce_to_lls(sys, fp, rmap)
