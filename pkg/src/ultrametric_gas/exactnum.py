"""Exact rationals, polynomials in ``u`` and rational functions in ``u``.

Every canonical partition function in this package is a rational function of
``u = q**(-beta)`` with rational coefficients.  ``RationalFunction`` keeps such
values in a unique reduced form so that equality is a field-wise comparison.

Polynomial products and gcds are delegated to FLINT (``python-flint``); the
public surface only ever exposes ``fractions.Fraction`` coefficients.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import mpmath
from flint import fmpq, fmpq_poly, fmpz_poly

BigRational = Fraction

Scalar = Union[int, Fraction]


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at (or expanded about) a pole."""


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _fmpq(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    f = to_fraction(x)
    return fmpq(f.numerator, f.denominator)


def format_rational(x: Fraction) -> str:
    """Serialize as ``"num/den"`` in base 10 (the denominator is always written)."""
    x = to_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


class UPoly:
    """Polynomial in ``u`` with rational coefficients; index k is the coefficient of u**k.

    The zero polynomial has an empty coefficient sequence.
    """

    __slots__ = ("_p",)

    def __init__(self, coeffs: Iterable = ()):
        if isinstance(coeffs, fmpq_poly):
            self._p = coeffs
        else:
            self._p = fmpq_poly([_fmpq(c) for c in coeffs])

    @classmethod
    def _wrap(cls, p: fmpq_poly) -> "UPoly":
        obj = cls.__new__(cls)
        obj._p = p
        return obj

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "UPoly":
        if k < 0:
            raise ValueError("monomial degree must be non-negative")
        return cls._wrap(fmpq_poly([0] * k + [_fmpq(c)]))

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(to_fraction(c) for c in self._p.coeffs())

    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return self._p.degree()

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def __eq__(self, other):
        if isinstance(other, UPoly):
            return self._p == other._p
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "UPoly") -> "UPoly":
        return UPoly._wrap(self._p + other._p)

    def __sub__(self, other: "UPoly") -> "UPoly":
        return UPoly._wrap(self._p - other._p)

    def __neg__(self) -> "UPoly":
        return UPoly._wrap(-self._p)

    def __mul__(self, other) -> "UPoly":
        if isinstance(other, UPoly):
            return UPoly._wrap(self._p * other._p)
        return UPoly._wrap(self._p * _fmpq(other))

    __rmul__ = __mul__

    def __call__(self, x: Scalar) -> Fraction:
        return to_fraction(self._p(_fmpq(x)))

    def gcd(self, other: "UPoly") -> "UPoly":
        """Monic gcd (zero only if both inputs are zero)."""
        return UPoly._wrap(self._p.gcd(other._p))

    def __repr__(self):
        return f"UPoly({[format_rational(c) for c in self.coeffs]})"

    def __str__(self):
        return str(self._p).replace("x", "u")

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "UPoly":
        return cls(parse_rational(s) for s in data)


def _canonicalize(num: fmpq_poly, den: fmpq_poly) -> tuple[fmpq_poly, fmpq_poly]:
    if den.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if num.is_zero():
        return num, fmpq_poly([1])
    if den.degree() > 0:
        g = num.gcd(den)
        if g.degree() > 0:
            num = num // g
            den = den // g
    # den -> primitive integer polynomial with positive leading coefficient
    dz = den.numer()
    c = dz.content()
    if dz.leading_coefficient() < 0:
        c = -c
    scale = fmpq(den.denom()) / fmpq(c)
    if scale == 1:
        return num, den
    return num * scale, fmpq_poly(dz) / fmpq(c) if c != 1 else fmpq_poly(dz)


class RationalFunction:
    """Reduced quotient ``num/den`` of polynomials in ``u``.

    Canonical form: gcd(num, den) = 1, den is a primitive integer polynomial
    with positive leading coefficient, and the zero function is ``0/1``.
    Instances are immutable and support ``+ - * /``, integer powers (negative
    powers included) and mixing with ``int``/``Fraction`` operands.
    """

    __slots__ = ("_n", "_d")

    def __init__(self, num: UPoly | Iterable = (), den: UPoly | Iterable = (1,)):
        n = num._p if isinstance(num, UPoly) else UPoly(num)._p
        d = den._p if isinstance(den, UPoly) else UPoly(den)._p
        self._n, self._d = _canonicalize(n, d)

    @classmethod
    def _from_flint(cls, n: fmpq_poly, d: fmpq_poly, reduced: bool = False) -> "RationalFunction":
        obj = cls.__new__(cls)
        if reduced:
            obj._n, obj._d = n, d
        else:
            obj._n, obj._d = _canonicalize(n, d)
        return obj

    @classmethod
    def const(cls, c: Scalar) -> "RationalFunction":
        return cls._from_flint(fmpq_poly([_fmpq(c)]), fmpq_poly([1]), reduced=True)

    @classmethod
    def u(cls) -> "RationalFunction":
        return cls._from_flint(fmpq_poly([0, 1]), fmpq_poly([1]), reduced=True)

    @classmethod
    def u_power(cls, k: int, c: Scalar = 1) -> "RationalFunction":
        """``c * u**k`` for any integer k; negative powers are cleared into the denominator."""
        c = _fmpq(c)
        if c == 0:
            return cls.const(0)
        if k >= 0:
            return cls._from_flint(fmpq_poly([0] * k + [c]), fmpq_poly([1]), reduced=True)
        return cls._from_flint(fmpq_poly([c]), fmpq_poly([0] * (-k) + [1]), reduced=True)

    @property
    def num(self) -> UPoly:
        return UPoly._wrap(self._n)

    @property
    def den(self) -> UPoly:
        return UPoly._wrap(self._d)

    def is_zero(self) -> bool:
        return self._n.is_zero()

    def is_constant(self) -> bool:
        return self._n.degree() <= 0 and self._d.degree() == 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("rational function is not constant")
        return to_fraction(self._n(0) / self._d(0))

    # -- arithmetic -----------------------------------------------------

    @staticmethod
    def _coerce(x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, (int, Fraction, fmpq)):
            return RationalFunction.const(x)
        if isinstance(x, UPoly):
            return RationalFunction._from_flint(x._p, fmpq_poly([1]), reduced=True)
        raise TypeError(f"cannot combine RationalFunction with {type(x).__name__}")

    def __add__(self, other):
        try:
            b = self._coerce(other)
        except TypeError:
            return NotImplemented
        a = self
        if a._d == b._d:
            return RationalFunction._from_flint(a._n + b._n, a._d)
        g = a._d.gcd(b._d)
        if g.degree() > 0:
            ad, bd = a._d // g, b._d // g
            return RationalFunction._from_flint(a._n * bd + b._n * ad, ad * b._d)
        return RationalFunction._from_flint(a._n * b._d + b._n * a._d, a._d * b._d)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._from_flint(-self._n, self._d, reduced=True)

    def __sub__(self, other):
        try:
            b = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, fmpq)):
            c = _fmpq(other)
            if c == 0:
                return RationalFunction.const(0)
            return RationalFunction._from_flint(self._n * c, self._d, reduced=True)
        try:
            b = self._coerce(other)
        except TypeError:
            return NotImplemented
        a = self
        if a.is_zero() or b.is_zero():
            return RationalFunction.const(0)
        # cross-cancel before multiplying keeps operands small
        g1 = a._n.gcd(b._d) if b._d.degree() > 0 else None
        g2 = b._n.gcd(a._d) if a._d.degree() > 0 else None
        an, bd = (a._n // g1, b._d // g1) if g1 is not None and g1.degree() > 0 else (a._n, b._d)
        bn, ad = (b._n // g2, a._d // g2) if g2 is not None and g2.degree() > 0 else (b._n, a._d)
        return RationalFunction._from_flint(an * bn, ad * bd, reduced=False)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction._from_flint(self._d, self._n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, fmpq)):
            c = _fmpq(other)
            if c == 0:
                raise ZeroDivisionError("division by zero")
            return RationalFunction._from_flint(self._n / c, self._d, reduced=True)
        try:
            b = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * b.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return RationalFunction.const(1)
        # coprime inputs stay coprime under powers
        return RationalFunction._from_flint(self._n ** k, self._d ** k)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self._n == other._n and self._d == other._d
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.num.coeffs, self.den.coeffs))

    def __call__(self, u0):
        return rf_eval(self, u0)

    def __repr__(self):
        return f"RationalFunction(({self.num}) / ({self.den}))"

    def __str__(self):
        if self._d == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "RationalFunction":
        return cls(UPoly.from_json(data["num"]), UPoly.from_json(data["den"]))


RF = RationalFunction


def rf_add(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    return a + b


def rf_mul(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    return a * b


def rf_div(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    return a / b


def rf_eval(f: RationalFunction, u0) -> Fraction:
    """Exact value ``f(u0)`` at a rational point."""
    x = _fmpq(u0)
    d = f._d(x)
    if d == 0:
        raise PoleError(f"pole of {f} at u = {format_rational(to_fraction(x))}")
    return to_fraction(f._n(x) / d)


def rf_eval_float(f: RationalFunction, u0, dps: int = 50) -> float:
    """Evaluate at a real point given as a float or mpmath number, in extended precision.

    For points that are not exact rationals (``q**(-beta)`` with irrational
    value); the coefficients stay exact until they meet the mpmath context.
    """
    with mpmath.workdps(dps):
        x = mpmath.mpf(u0)

        def horner(p: fmpq_poly):
            acc = mpmath.mpf(0)
            for c in reversed(p.coeffs()):
                acc = acc * x + mpmath.mpf(int(c.p)) / int(c.q)
            return acc

        d = horner(f._d)
        if d == 0:
            raise PoleError(f"pole of {f} at u = {u0}")
        return float(horner(f._n) / d)


def rf_taylor(f: RationalFunction, K: int) -> list[Fraction]:
    """First ``K + 1`` Taylor coefficients of ``f`` about ``u = 0``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    num = [to_fraction(c) for c in f._n.coeffs()]
    den = [to_fraction(c) for c in f._d.coeffs()]
    if not den or den[0] == 0:
        raise PoleError("rational function has a pole at u = 0")
    d0 = den[0]
    out: list[Fraction] = []
    for k in range(K + 1):
        acc = num[k] if k < len(num) else Fraction(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc / d0)
    return out


def rf_has_root_in_common(f_den: UPoly, g: UPoly) -> bool:
    if f_den.is_zero() or g.is_zero():
        raise ValueError("both polynomials must be nonzero")
    return f_den.gcd(g).degree() > 0


def upoly_from_ints(coeffs: Sequence[int]) -> UPoly:
    return UPoly._wrap(fmpq_poly(fmpz_poly(list(coeffs))))


def parse_beta(text: str):
    """Parse a temperature given as "p/q", an integer or a decimal string, exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse beta {text!r}") from exc


def _integer_root(x: int, k: int) -> int | None:
    """Exact k-th root of a positive integer, or None."""
    r = int(round(x ** (1.0 / k))) if x.bit_length() < 1000 else int(mpmath.nint(mpmath.root(x, k)))
    for c in (r - 1, r, r + 1):
        if c > 0 and c**k == x:
            return c
    return None


def u_from_beta(q: int, beta) -> Fraction | float:
    """u = q**(-beta): an exact rational when one exists, otherwise a float."""
    b = to_fraction(beta) if not isinstance(beta, float) else None
    if b is None:
        return float(q) ** (-beta)
    a, d = b.numerator, b.denominator
    root = _integer_root(q ** abs(a), d) if a else 1
    if root is not None:
        return Fraction(1, root) if a > 0 else Fraction(root)
    with mpmath.workdps(30):
        return float(mpmath.power(q, -mpmath.mpf(a) / d))


def rf_substitute_power(f: RationalFunction, k: int) -> RationalFunction:
    """f(u**k) for a positive integer k."""
    if k < 1:
        raise ValueError("k must be positive")

    def spread(p: fmpq_poly) -> fmpq_poly:
        cs = p.coeffs()
        out = [fmpq(0)] * (k * (len(cs) - 1) + 1) if cs else []
        for i, c in enumerate(cs):
            out[k * i] = c
        return fmpq_poly(out)

    return RationalFunction._from_flint(spread(f._n), spread(f._d))
