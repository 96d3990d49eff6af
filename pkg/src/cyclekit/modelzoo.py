"""Registry of model systems with their known limit-cycle outcomes.

Every entry can produce its LLS form and a first-order kinetic form with a
closed-form fixed point, so the whole pipeline (reduction included) can be
exercised on it. Parameters are exact rationals unless a float is passed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .averaging import wallis
from .errors import InputError, ParameterOutOfRange
from .polycore import BiPoly, Coeff, UniPoly, as_coeff
from .reduction import KineticSystem, LLSClass, LLSSystem, fixed_point_info, reduce_to_lls, build_reduction_map

F = Fraction


@dataclass(frozen=True)
class Expected:
    """Known outcome for a parameter set; ``provenance`` is "published" (a literature value) or "derived" (computed here)."""

    lls_class: LLSClass
    N: int
    M: int
    cycle_count: int | None = None
    radii: tuple | None = None
    stabilities: tuple[str, ...] | None = None
    locus: str = ""
    provenance: str = "published"


@dataclass(frozen=True)
class ModelEntry:
    name: str
    description: str
    defaults: Mapping[str, Coeff]
    _kinetic: Callable[[dict], tuple[KineticSystem, tuple]]
    _expected: Callable[[dict], Expected]
    _check: Callable[[dict], list[str]] = lambda p: []
    _printed: Callable[[dict], LLSSystem] | None = None
    native: str = "lls"  # the form the model is usually stated in
    extra_params: Callable[[str], bool] = field(default=lambda key: False)

    def params(self, **overrides) -> dict:
        p = dict(self.defaults)
        for k, v in overrides.items():
            if k not in p and not self.extra_params(k):
                raise InputError(f"model {self.name!r} has no parameter {k!r}; known: {sorted(p)}")
            p[k] = as_coeff(v)
        return p

    def notes(self, **overrides) -> list[str]:
        return self._check(self.params(**overrides))

    def kinetic(self, **overrides) -> tuple[KineticSystem, tuple]:
        """Planar kinetic form and its closed-form fixed point."""
        p = self.params(**overrides)
        self._check(p)
        return self._kinetic(p)

    def lls(self, **overrides) -> LLSSystem:
        sys, fp = self.kinetic(**overrides)
        info = fixed_point_info(sys, *fp)
        return reduce_to_lls(sys, info, build_reduction_map(sys, info))

    def printed_lls(self, **overrides) -> LLSSystem | None:
        """LLS form exactly as written in the literature, when it is stated there."""
        if self._printed is None:
            return None
        p = self.params(**overrides)
        self._check(p)
        return self._printed(p)

    def expected(self, **overrides) -> Expected:
        return self._expected(self.params(**overrides))


def _positive(p, *names):
    for n in names:
        if not p[n] > 0:
            raise ParameterOutOfRange(f"{n} must be > 0 (got {p[n]})")


def _first_order(damping: BiPoly, restoring: BiPoly = BiPoly({(1, 0): -1})) -> tuple[KineticSystem, tuple]:
    """``x' = y, y' = restoring(x) + damping(x, y)`` with linear parts split off."""
    rhs = restoring + damping
    b = (rhs.coeff(0, 0), rhs.coeff(1, 0), rhs.coeff(0, 1))
    g = BiPoly({k: c for k, c in rhs.terms.items() if sum(k) >= 2})
    return KineticSystem((0, 0, 1), b, BiPoly(), g), (F(0), F(0))


def _lls(rhs: BiPoly, name: str) -> LLSSystem:
    return LLSSystem(rhs, name=name)


# van der Pol: x'' + eps*(x^2 - 1)*x' + x = 0

def _vdp_kin(p):
    e = p["eps"]
    sys, fp = _first_order(BiPoly({(0, 1): e, (2, 1): -e}))
    return KineticSystem(sys.a, sys.b, sys.f, sys.g, name="van_der_pol"), fp


def _vdp_expected(p):
    return Expected(LLSClass.LIENARD, 2, 1, 1, (F(2),), ("Stable",), "classical van der Pol cycle")


# Sel'kov glycolysis: x' = -x + a y + x^2 y, y' = b - a y - x^2 y

def _gly_kin(p):
    a, b = p["a"], p["b"]
    f = BiPoly({(2, 1): 1})
    sys = KineticSystem.with_mu((0, -1, a), (b, 0, -a), f, -1, name="glycolytic")
    return sys, (b, b / (a + b * b))


def _gly_printed(p):
    a, b = p["a"], p["b"]
    k = b + b / (a + b * b)
    Fpoly = BiPoly({(0, 0): 1 + a + 3 * b * b - 2 * b * k, (1, 0): -2 * b, (0, 1): k - 3 * b,
                    (1, 1): 1, (0, 2): 1})
    # xi'' = -F*xi' - G
    rhs = -(Fpoly * BiPoly.y()) - BiPoly({(1, 0): a + b * b})
    return _lls(rhs, "glycolytic")


def _gly_check(p):
    _positive(p, "a", "b")
    a, b = p["a"], p["b"]
    f00 = 1 + a + b * b - 2 * b * b / (a + b * b)
    return [] if f00 < 0 else [f"F(0,0) = {float(f00):.4g} >= 0: no stable cycle is expected"]


def _gly_expected(p):
    ok = not _gly_check(p)
    return Expected(LLSClass.GENERAL, 1, 3, 1 if ok else None, None, ("Stable",) if ok else None,
                    "glycolytic oscillator")


# modified Brusselator: x' = a1 - (b + alpha) x + x^2 y, y' = b x - x^2 y

def _bru_kin(p):
    a1, b, al = p["a1"], p["b"], p["alpha"]
    sys = KineticSystem.with_mu((a1, -(b + al), 0), (0, b, 0), BiPoly({(2, 1): 1}), -1,
                                name="modified_brusselator")
    return sys, (a1 / al, al * b / a1)


def _bru_printed(p):
    a1, b, al = p["a1"], p["b"], p["alpha"]
    Fpoly = BiPoly({(0, 0): -b + a1 * a1 / (al * al) + al, (1, 0): -2 * a1 / al,
                    (0, 1): -2 * a1 / (al * al) + b / a1, (0, 2): 1 / (al * al), (1, 1): 1 / al})
    rhs = -(Fpoly * BiPoly.y()) - BiPoly({(1, 0): a1 * a1 / al})
    return _lls(rhs, "modified_brusselator")


def _bru_check(p):
    _positive(p, "a1", "b", "alpha")
    a1, b, al = p["a1"], p["b"], p["alpha"]
    f00 = -b + a1 * a1 / (al * al) + al
    return [] if f00 < 0 else [f"F(0,0) = {float(f00):.4g} >= 0: no stable cycle is expected"]


def _bru_expected(p):
    ok = not _bru_check(p)
    return Expected(LLSClass.GENERAL, 1, 3, 1 if ok else None, None, ("Stable",) if ok else None,
                    "modified Brusselator")


# Rychkov-type Lienard system: x'' + F'(x) x' + x = 0, F = a1 x + a3 x^3 + a5 x^5

def _ry_kin(p):
    a1, a3, a5 = p["a1"], p["a3"], p["a5"]
    sys, fp = _first_order(BiPoly({(0, 1): -a1, (2, 1): -3 * a3, (4, 1): -5 * a5}))
    return KineticSystem(sys.a, sys.b, sys.f, sys.g, name="rychkov"), fp


def _ry_expected(p):
    if (p["a1"], p["a3"], p["a5"]) == (F(4, 5), F(-4, 3), F(8, 25)):
        return Expected(LLSClass.LIENARD, 4, 1, 2, (F(1), F(2)), ("Unstable", "Stable"),
                        "two-cycle case")
    return Expected(LLSClass.LIENARD, 4, 1, locus="two-cycle case", provenance="derived")


# Kaiser: x'' - mu (1 - x^2 + alpha x^4 - beta x^6) x' + x = 0

def _ka_kin(p):
    mu, al, be = p["mu"], p["alpha"], p["beta"]
    sys, fp = _first_order(BiPoly({(0, 1): mu, (2, 1): -mu, (4, 1): mu * al, (6, 1): -mu * be}))
    return KineticSystem(sys.a, sys.b, sys.f, sys.g, name="kaiser"), fp


def _ka_check(p):
    _positive(p, "alpha", "mu")
    if p["beta"] < 0:
        raise ParameterOutOfRange(f"beta must be >= 0 (got {p['beta']})")
    return []


def _ka_expected(p):
    n = 6 if p["beta"] != 0 else 4
    if (p["alpha"], p["beta"]) == (F(144, 1000), F(5, 1000)):
        return Expected(LLSClass.LIENARD, n, 1, 3, None, ("Stable", "Unstable", "Stable"),
                        "three-cycle zone")
    if (p["alpha"], p["beta"]) == (F(1, 10), F(0)):
        return Expected(LLSClass.LIENARD, n, 1, 2, (2.35, 3.80), ("Stable", "Unstable"),
                        "quartic damping, beta = 0")
    return Expected(LLSClass.LIENARD, n, 1, locus="outside the tabulated cases", provenance="derived")


# Gaiko: x'' - (mu1 + mu2 x' + ... + mu_{2k+1} x'^{2k}) x' + x = 0

def _product_coeffs(k: int) -> list[Fraction]:
    """Coefficients of prod_{j=1..k} (1 - rho/j^2)."""
    poly = UniPoly([1])
    for j in range(1, k + 1):
        poly = poly * UniPoly([1, F(-1, j * j)])
    return [F(c) for c in poly.coeffs]


def gaiko_default_mus(k: int, eps) -> dict[str, Fraction]:
    """Coefficients placing the averaged cycles at radii 1, 2, ..., k."""
    p = _product_coeffs(k)
    mus = {f"mu{m}": F(0) for m in range(1, 2 * k + 2)}
    for i, c in enumerate(p):
        mus[f"mu{2 * i + 1}"] = eps * c / (2 * wallis(0, i + 1))
    return mus


def _ga_params(p) -> dict:
    k = p["k"]
    if k.denominator != 1 or k < 1:
        raise ParameterOutOfRange(f"k must be a positive integer (got {k})")
    k = int(k)
    mus = gaiko_default_mus(k, p["eps"])
    for key, v in p.items():
        if key.startswith("mu"):
            m = int(key[2:])
            if not 1 <= m <= 2 * k + 1:
                raise ParameterOutOfRange(f"{key} outside mu1..mu{2 * k + 1}")
            mus[key] = v
    return {"k": k, **mus}


def _ga_kin(p):
    q = _ga_params(p)
    damping = BiPoly({(0, m): q[f"mu{m}"] for m in range(1, 2 * q["k"] + 2)})
    sys, fp = _first_order(damping)
    return KineticSystem(sys.a, sys.b, sys.f, sys.g, name="gaiko"), fp


def _ga_check(p):
    q = _ga_params(p)
    return [] if q["mu1"] > 0 else ["at most k cycles requires mu1 > 0"]


def _ga_expected(p):
    q = _ga_params(p)
    k = q["k"]
    custom = any(key.startswith("mu") for key in p)
    if custom:
        return Expected(LLSClass.RAYLEIGH, 1, 2 * k + 1, locus="cycles placed at radii 1..k", provenance="derived")
    stab = tuple("Stable" if i % 2 == 0 else "Unstable" for i in range(k))
    return Expected(LLSClass.RAYLEIGH, 1, 2 * k + 1, k, tuple(F(j) for j in range(1, k + 1)), stab,
                    "cycles placed at radii 1..k", "derived")


# Blows-Lloyd: x' = y - F(x), y' = -x, i.e. x'' + F'(x) x' + x = 0

BLOWS_LLOYD_K3 = (F(72), F(-392, 3), F(224, 5), F(-128, 35))  # coefficients of x, x^3, x^5, x^7 in -F/eps


def blows_lloyd_F(k: int) -> list[Fraction]:
    """Odd coefficients of ``-F(x)/eps`` giving averaged cycles at radii 1..k."""
    p = _product_coeffs(k)
    scale = 2 * 36 if k == 3 else 2  # k = 3 reproduces the literature normalisation
    out = []
    for i, c in enumerate(p):
        deriv_coeff = scale * c / (2 * wallis(i, 1))  # coefficient of x^{2i} in -F'/eps
        out.append(deriv_coeff / (2 * i + 1))
    return out


def _bl_kin(p):
    k = p["k"]
    if k.denominator != 1 or k < 1:
        raise ParameterOutOfRange(f"k must be a positive integer (got {k})")
    e = p["eps"]
    if e == 0:
        raise ParameterOutOfRange("eps must be nonzero")
    coeffs = blows_lloyd_F(int(k))
    # x'' = -x - F'(x) x' with F'(x) = -eps * sum (2i+1) c_i x^{2i}
    damping = BiPoly({(2 * i, 1): e * (2 * i + 1) * c for i, c in enumerate(coeffs)})
    sys, fp = _first_order(damping)
    return KineticSystem(sys.a, sys.b, sys.f, sys.g, name="blows_lloyd"), fp


def _bl_expected(p):
    k = int(p["k"])
    stab = tuple("Stable" if i % 2 == 0 else "Unstable" for i in range(k))
    if p["eps"] < 0:
        stab = tuple("Unstable" if s == "Stable" else "Stable" for s in stab)
    return Expected(LLSClass.LIENARD, 2 * k, 1, k, tuple(F(j) for j in range(1, k + 1)), stab,
                    "cycles at radii 1..k", "published" if k == 3 else "derived")


# Lotka-Volterra: x' = alpha x - beta x y, y' = delta x y - gamma y

def _lv_kin(p):
    al, be, ga, de = p["alpha"], p["beta"], p["gamma"], p["delta"]
    sys = KineticSystem.with_mu((0, al, 0), (0, 0, -ga), BiPoly({(1, 1): -be}), -de / be,
                                name="lotka_volterra")
    return sys, (ga / de, al / be)


def _lv_expected(p):
    return Expected(LLSClass.GENERAL, 2, 2, 0, (), (), "predator-prey center")


_ENTRIES = [
    ModelEntry("van_der_pol", "x'' + eps (x^2 - 1) x' + x = 0", {"eps": F(1, 10)},
               _vdp_kin, _vdp_expected, lambda p: _positive(p, "eps") or []),
    ModelEntry("glycolytic", "x' = -x + a y + x^2 y, y' = b - a y - x^2 y",
               {"a": F(1, 10), "b": F(1, 2)}, _gly_kin, _gly_expected, _gly_check, _gly_printed,
               native="kinetic"),
    ModelEntry("modified_brusselator", "x' = a1 - (b + alpha) x + x^2 y, y' = b x - x^2 y",
               {"a1": F(1), "b": F(11, 5), "alpha": F(1)}, _bru_kin, _bru_expected, _bru_check,
               _bru_printed, native="kinetic"),
    ModelEntry("rychkov", "x'' + F'(x) x' + x = 0, F = a1 x + a3 x^3 + a5 x^5",
               {"a1": F(4, 5), "a3": F(-4, 3), "a5": F(8, 25)}, _ry_kin, _ry_expected),
    ModelEntry("kaiser", "x'' - mu (1 - x^2 + alpha x^4 - beta x^6) x' + x = 0",
               {"alpha": F(144, 1000), "beta": F(5, 1000), "mu": F(1, 100)},
               _ka_kin, _ka_expected, _ka_check),
    ModelEntry("gaiko", "x'' - (mu1 + mu2 x' + ... + mu_{2k+1} x'^{2k}) x' + x = 0",
               {"k": F(2), "eps": F(1, 100)}, _ga_kin, _ga_expected, _ga_check,
               extra_params=lambda key: key.startswith("mu") and key[2:].isdigit()),
    ModelEntry("blows_lloyd", "x' = y - F(x), y' = -x with cycles at radii 1..k",
               {"k": F(3), "eps": F(1, 100)}, _bl_kin, _bl_expected),
    ModelEntry("lotka_volterra", "x' = alpha x - beta x y, y' = delta x y - gamma y",
               {"alpha": F(2), "beta": F(1), "gamma": F(1), "delta": F(1)}, _lv_kin, _lv_expected,
               lambda p: _positive(p, "alpha", "beta", "gamma", "delta") or [], native="kinetic"),
]

_REGISTRY = {e.name: e for e in _ENTRIES}


def zoo() -> list[ModelEntry]:
    return list(_ENTRIES)


def get_model(name: str) -> ModelEntry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InputError(f"unknown model {name!r}; available: {', '.join(_REGISTRY)}") from None
