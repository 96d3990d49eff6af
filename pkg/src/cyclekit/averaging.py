"""First-order Krylov-Bogoliubov averaging of an LLS oscillator.

With ``omega**2 = -A10`` and ``tau = omega*t`` the LLS equation becomes

    Z'' + Z = eps * sum B_nm Z^n (omega Z')^m,     B = A/sigma, eps = sigma/omega**2

(the linear restoring term excluded). Writing ``Z = r cos(theta)``,
``Z' = -r sin(theta)`` and averaging over ``theta`` gives

    dr/dtau   = eps * omega * r * core(r**2)
    dphi/dtau = eps * phase(r**2)

where ``core`` and ``phase`` are polynomials in ``rho = r**2`` with exact
coefficients whenever the B-table and ``omega**2`` are exact. ``omega`` itself
may be irrational, which is why it is kept outside ``core``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import NotOscillatory
from .polycore import BiPoly, Coeff, UniPoly, is_exact
from .reduction import LLSSystem

log = logging.getLogger(__name__)

EPS_WARN = 0.3
QUADRATURE_POINTS = 4096


def wallis(a: int, b: int) -> Fraction:
    """Mean of ``cos(t)**(2a) * sin(t)**(2b)`` over one period, exactly."""
    if a < 0 or b < 0:
        raise ValueError("wallis() needs non-negative integers")
    f = math.factorial
    return Fraction(f(2 * a) * f(2 * b), 4 ** (a + b) * f(a) * f(b) * f(a + b))


def _exact_sqrt(q: Coeff):
    """Exact square root of a non-negative rational when it is a perfect square."""
    if is_exact(q):
        q = Fraction(q)
        n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if n * n == q.numerator and d * d == q.denominator:
            return Fraction(n, d)
    return math.sqrt(q)


@dataclass(frozen=True)
class RescaledOscillator:
    """Normalised oscillator ``Z'' + eps*h(Z, Z') + Z = 0``.

    ``B`` holds every ``A_nm / sigma`` including ``B10 = -omega**2/sigma``,
    which is absorbed into the unit-frequency linear part and never enters
    ``h``.
    """

    sigma: Coeff
    omega_sq: Coeff
    omega: Coeff
    eps: Coeff
    B: Mapping[tuple[int, int], Coeff]
    b01_sign: int
    N: int
    M: int
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def omega_pow(self, m: int):
        half = self.omega_sq ** (m // 2)
        return half * self.omega if m % 2 else half

    @property
    def h(self) -> BiPoly:
        """``h(Z, Z')`` with the omega**m weights folded into the coefficients."""
        return BiPoly(
            {
                (n, m): -c * self.omega_pow(m)
                for (n, m), c in self.B.items()
                if (n, m) not in ((0, 0), (1, 0))
            }
        )

    @classmethod
    def generic(cls, N: int, M: int) -> "RescaledOscillator":
        """Table of independent sympy symbols ``B{n}{m}`` for ``n <= N, m <= M``.

        Used to derive averaged equations and degree bounds symbolically.
        """
        import sympy

        omega = sympy.Symbol("omega", positive=True)
        eps = sympy.Symbol("epsilon", positive=True)
        B = {
            (n, m): sympy.Symbol(f"B{n}_{m}")
            for n in range(N + 1)
            for m in range(M + 1)
            if (n, m) not in ((0, 0), (1, 0))
        }
        return cls(sympy.Integer(1), omega**2, omega, eps, B, 1, N, M)


def rescale(lls: LLSSystem, eps_warn: float = EPS_WARN) -> RescaledOscillator:
    """Normalise the damping by ``sigma = |F(0,0)|`` and time by ``omega``.

    A center-type origin (``A01 = 0``) falls back to ``sigma = 1``.
    """
    a10 = lls.a(1, 0)
    omega_sq = -a10
    if not omega_sq > 0:
        raise NotOscillatory(f"-A10 = {omega_sq} is not positive; there is no linear frequency")
    a01 = lls.a(0, 1)
    sigma = abs(a01) if a01 != 0 else Fraction(1)
    omega = _exact_sqrt(omega_sq)
    eps = sigma / omega_sq
    B = {k: c / sigma for k, c in lls.A.items()}
    warnings = []
    if eps >= eps_warn:
        msg = (f"eps = sigma/omega^2 = {float(eps):.4g} >= {eps_warn}: first-order "
               "averaging is only heuristic here")
        log.warning(msg)
        warnings.append(msg)
    sign = (a01 > 0) - (a01 < 0)
    return RescaledOscillator(sigma, omega_sq, omega, eps, B, sign, lls.N, lls.M, tuple(warnings))


@dataclass(frozen=True)
class AveragedDynamics:
    """Averaged amplitude/phase equations in tau-time.

    ``dr/dtau = eps*r*R(r**2)`` with ``R = omega*radial_core``, and
    ``dphi/dtau = eps*phase(r**2)``.
    """

    radial_core: UniPoly
    phase: UniPoly
    eps: Coeff
    omega: Coeff
    omega_sq: Coeff
    N: int
    M: int

    @property
    def radial(self) -> UniPoly:
        return self.radial_core.scale(self.omega)

    def dr(self, r):
        return self.eps * self.omega * r * self.radial_core(r * r)

    def dphi(self, r):
        return self.eps * self.phase(r * r)


def kb_average(osc: RescaledOscillator) -> AveragedDynamics:
    """Closed-form averaging of every monomial of ``h``.

    Only damping terms with even n and odd m feed the radial equation; damping
    terms with odd n and even m, and odd restoring terms, feed the phase.
    """
    core: dict[int, Coeff] = {}
    phase: dict[int, Coeff] = {}

    def add(acc, k, v):
        acc[k] = acc[k] + v if k in acc else v

    for (n, m), b in osc.B.items():
        if m == 0:
            if n >= 3 and n % 2:
                add(phase, (n - 1) // 2, -b * wallis((n + 1) // 2, 0))
        elif n % 2 == 0 and m % 2 == 1:
            add(core, (n + m - 1) // 2, b * osc.omega_sq ** ((m - 1) // 2) * wallis(n // 2, (m + 1) // 2))
        elif n % 2 == 1 and m % 2 == 0:
            add(phase, (n + m - 1) // 2, -b * osc.omega_sq ** (m // 2) * wallis((n + 1) // 2, m // 2))

    def to_poly(acc):
        deg = max(acc, default=-1)
        return UniPoly([acc.get(k, 0) for k in range(deg + 1)])

    return AveragedDynamics(
        to_poly(core), to_poly(phase), osc.eps, osc.omega, osc.omega_sq, osc.N, osc.M
    )


def numeric_average_oracle(
    osc: RescaledOscillator, r: float, phi: float = 0.0, points: int = QUADRATURE_POINTS
) -> tuple[float, float]:
    """Brute-force ``<eps*h*sin(theta)>`` and ``<eps*h*cos(theta)>/r``.

    Trapezoid rule over one period of a smooth periodic integrand; exact up to
    rounding for trigonometric polynomials of degree below ``points``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    theta = phi + 2 * np.pi * np.arange(points) / points
    z = r * np.cos(theta)
    zd = -r * np.sin(theta)
    h = np.zeros_like(theta)
    for (n, m), c in osc.h.terms.items():
        h += float(c) * z**n * zd**m
    eps = float(osc.eps)
    return eps * float(np.mean(h * np.sin(theta))), eps * float(np.mean(h * np.cos(theta))) / r
