"""Exact polynomial arithmetic in one and two variables.

Coefficients are :class:`fractions.Fraction` whenever the inputs are exact.
Floats are accepted and propagate through arithmetic (``Fraction + float`` is
a float), so a polynomial is "exact" iff none of its coefficients is a float.
Other number-like objects (e.g. sympy symbols) are carried along untouched,
which is how the generic coefficient tables in :mod:`cyclekit.averaging` are
built.

Both polynomial types are immutable and kept in canonical form after every
operation: zero coefficients are never stored, so structural equality is
polynomial equality.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import zip_longest
from types import MappingProxyType
from typing import Any, Iterable, Mapping

Rational = Fraction

Coeff = Any  # Fraction | float | int | sympy expression


def as_coeff(value: Any) -> Coeff:
    """Normalise a user-supplied number.

    ``int`` and numeric strings (``"3"``, ``"-2/7"``, ``"0.144"``) become exact
    rationals; floats stay floats; anything else is returned unchanged.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    return value


def is_exact(c: Coeff) -> bool:
    return isinstance(c, (Fraction, int)) and not isinstance(c, bool)


def format_coeff(c: Coeff) -> str | float:
    """JSON-friendly form: ``"p/q"`` (or ``"p"``) for rationals, a float otherwise."""
    if is_exact(c):
        c = Fraction(c)
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return float(c)


def _nonzero(c: Coeff) -> bool:
    return not (c == 0)


class BiPoly:
    """Polynomial in two variables, stored as ``{(i, j): coefficient}``.

    The variables are positional; ``p(x, y)`` evaluates at ``(x, y)``.

    >>> x, y = BiPoly.x(), BiPoly.y()
    >>> (x * y).compose(BiPoly.x() + 1, BiPoly.y()) == x * y + y
    True
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Coeff] | Iterable | None = None):
        acc: dict[tuple[int, int], Coeff] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for (i, j), c in items:
            if not (isinstance(i, int) and isinstance(j, int)) or i < 0 or j < 0:
                raise ValueError(f"exponents must be non-negative integers, got {(i, j)}")
            c = as_coeff(c)
            acc[(i, j)] = acc[(i, j)] + c if (i, j) in acc else c
        self._terms = {k: v for k, v in acc.items() if _nonzero(v)}

    @classmethod
    def _raw(cls, terms: dict) -> "BiPoly":
        p = cls.__new__(cls)
        p._terms = {k: v for k, v in terms.items() if _nonzero(v)}
        return p

    @classmethod
    def constant(cls, c: Coeff) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c: Coeff = 1) -> "BiPoly":
        return cls({(i, j): c})

    @classmethod
    def x(cls) -> "BiPoly":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "BiPoly":
        return cls({(0, 1): 1})

    @property
    def terms(self) -> Mapping[tuple[int, int], Coeff]:
        return MappingProxyType(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def coeff(self, i: int, j: int) -> Coeff:
        return self._terms.get((i, j), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self._terms.values())

    @property
    def degree(self) -> tuple[int, int]:
        """``(max i, max j)``; ``(-1, -1)`` for the zero polynomial."""
        if not self._terms:
            return (-1, -1)
        return (max(i for i, _ in self._terms), max(j for _, j in self._terms))

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self._terms), default=-1)

    def _coerce(self, other) -> "BiPoly":
        return other if isinstance(other, BiPoly) else BiPoly.constant(other)

    def __add__(self, other) -> "BiPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out[k] + v if k in out else v
        return BiPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "BiPoly":
        return BiPoly._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "BiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "BiPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            return self.scale(other)
        out: dict[tuple[int, int], Coeff] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out[k] + c1 * c2 if k in out else c1 * c2
        return BiPoly._raw(out)

    def __rmul__(self, other) -> "BiPoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "BiPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result, base = BiPoly.constant(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: Coeff) -> "BiPoly":
        c = as_coeff(c)
        return BiPoly._raw({k: v * c for k, v in self._terms.items()})

    def derivative(self, var: int) -> "BiPoly":
        """Partial derivative in variable 0 (first) or 1 (second)."""
        if var not in (0, 1):
            raise ValueError("var must be 0 or 1")
        out = {}
        for (i, j), c in self._terms.items():
            e = (i, j)[var]
            if e:
                out[(i - 1, j) if var == 0 else (i, j - 1)] = c * e
        return BiPoly._raw(out)

    def __call__(self, x, y):
        total = 0
        for (i, j), c in self._terms.items():
            total = total + c * x**i * y**j
        return total

    def compose(self, x_sub: "BiPoly", y_sub: "BiPoly") -> "BiPoly":
        """Return ``self(x_sub, y_sub)`` expanded in canonical form."""
        x_sub, y_sub = self._coerce(x_sub), self._coerce(y_sub)
        di, dj = self.degree
        xp = [BiPoly.constant(1)]
        for _ in range(di):
            xp.append(xp[-1] * x_sub)
        yp = [BiPoly.constant(1)]
        for _ in range(dj):
            yp.append(yp[-1] * y_sub)
        out = BiPoly()
        for (i, j), c in self._terms.items():
            out = out + (xp[i] * yp[j]).scale(c)
        return out

    def map_coeffs(self, fn) -> "BiPoly":
        return BiPoly._raw({k: fn(v) for k, v in self._terms.items()})

    def to_float(self) -> "BiPoly":
        return self.map_coeffs(float)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiPoly):
            other = BiPoly.constant(other)
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def format(self, names: tuple[str, str] = ("x", "y")) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in self.items():
            mono = "*".join(
                f"{n}^{e}" if e > 1 else n for n, e in zip(names, (i, j)) if e
            )
            parts.append(f"({format_coeff(c) if is_exact(c) or isinstance(c, float) else c})"
                         + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"BiPoly({self.format()})"


def poly_compose(p: BiPoly, x_sub: BiPoly, y_sub: BiPoly) -> BiPoly:
    """Substitute ``x -> x_sub``, ``y -> y_sub`` into ``p``."""
    return p.compose(x_sub, y_sub)


class UniPoly:
    """Univariate polynomial with coefficients listed from the constant term up."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Coeff] = ()):
        c = [as_coeff(v) for v in coeffs]
        while c and not _nonzero(c[-1]):
            c.pop()
        self._c = tuple(c)

    @property
    def coeffs(self) -> tuple[Coeff, ...]:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self._c)

    def coeff(self, k: int) -> Coeff:
        return self._c[k] if 0 <= k < len(self._c) else Fraction(0)

    @property
    def leading(self) -> Coeff:
        return self._c[-1] if self._c else Fraction(0)

    def __call__(self, x):
        acc = 0
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    def _coerce(self, other) -> "UniPoly":
        return other if isinstance(other, UniPoly) else UniPoly([other])

    def __add__(self, other) -> "UniPoly":
        other = self._coerce(other)
        return UniPoly(a + b for a, b in zip_longest(self._c, other._c, fillvalue=0))

    __radd__ = __add__

    def __neg__(self) -> "UniPoly":
        return UniPoly(-a for a in self._c)

    def __sub__(self, other) -> "UniPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "UniPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "UniPoly":
        if not isinstance(other, UniPoly):
            return self.scale(other)
        if not self._c or not other._c:
            return UniPoly()
        out = [0] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            for j, b in enumerate(other._c):
                out[i + j] = out[i + j] + a * b
        return UniPoly(out)

    def __rmul__(self, other) -> "UniPoly":
        return self.scale(other)

    def scale(self, c: Coeff) -> "UniPoly":
        c = as_coeff(c)
        return UniPoly(a * c for a in self._c)

    def derivative(self) -> "UniPoly":
        return UniPoly(k * a for k, a in enumerate(self._c) if k)

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        """Euclidean division over the coefficient field."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self._c)
        q = [Fraction(0)] * max(len(rem) - len(other._c) + 1, 0)
        lead = other.leading
        for k in range(len(q) - 1, -1, -1):
            t = rem[k + other.degree] / lead
            q[k] = t
            for i, b in enumerate(other._c):
                rem[k + i] = rem[k + i] - t * b
        return UniPoly(q), UniPoly(rem[: other.degree])

    def monic(self) -> "UniPoly":
        return self.scale(1 / Fraction(self.leading)) if self.is_exact() else self.scale(1 / self.leading)

    def gcd(self, other: "UniPoly") -> "UniPoly":
        """Monic gcd; meaningful for exact coefficients only."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def squarefree_factors(self) -> list[tuple["UniPoly", int]]:
        """Yun's decomposition: ``[(g_k, k)]`` with ``self ~ prod g_k**k``.

        Only non-constant factors are returned. Requires exact coefficients.
        """
        if self.degree < 1:
            return []
        f = self.monic()
        df = f.derivative()
        a = f.gcd(df)
        b = f.divmod(a)[0]
        c = df.divmod(a)[0]
        d = c - b.derivative()
        out, k = [], 1
        while b.degree >= 1:
            a = b.gcd(d)
            if a.degree >= 1:
                out.append((a, k))
            b = b.divmod(a)[0]
            c = d.divmod(a)[0]
            d = c - b.derivative()
            k += 1
        return out

    def sturm_count(self, lo, hi) -> int:
        """Number of distinct real roots in ``(lo, hi]`` (exact coefficients).

        ``hi`` may be ``float('inf')``.
        """
        if self.is_zero():
            raise ValueError("zero polynomial has infinitely many roots")
        seq = [self, self.derivative()]
        while not seq[-1].is_zero():
            seq.append(-(seq[-2].divmod(seq[-1])[1]))
        seq.pop()

        def sign_changes(x) -> int:
            if x == float("inf"):
                vals = [p.leading for p in seq]
            else:
                vals = [p(Fraction(x)) for p in seq]
            vals = [v for v in vals if v != 0]
            return sum(1 for u, v in zip(vals, vals[1:]) if (u > 0) != (v > 0))

        return sign_changes(lo) - sign_changes(hi)

    def to_float(self) -> "UniPoly":
        return UniPoly(float(c) for c in self._c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def format(self, var: str = "t") -> str:
        if not self._c:
            return "0"
        terms = []
        for k, c in enumerate(self._c):
            if not _nonzero(c):
                continue
            shown = format_coeff(c) if is_exact(c) or isinstance(c, float) else c
            mono = "" if k == 0 else (f"*{var}" if k == 1 else f"*{var}^{k}")
            terms.append(f"({shown}){mono}")
        return " + ".join(terms)

    def __repr__(self) -> str:
        return f"UniPoly({self.format()})"
