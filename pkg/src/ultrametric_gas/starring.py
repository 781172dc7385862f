"""Truncated power series in the fugacity t with the twisted products star^l.

For C = u**l the level-l product is

    (sum a_n t^n) *_l (sum b_m t^m) = sum_{n,m} C^(n m) a_n b_m t^(n+m),

and the transform ``overline`` multiplies the t^n coefficient by C^C(n,2).
``overline`` intertwines *_l with the ordinary product, and level 0 is the
ordinary product.

Coefficients live in whatever ring ``u`` lives in: rational functions by
default, or exact rationals / floats when u has been fixed to a number.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Any, Sequence

from .exactnum import RF, RationalFunction, to_fraction


class SeriesMismatchError(ValueError):
    """Operands disagree on q, truncation degree or the value of u."""


def _is_zero(x) -> bool:
    return x == 0


@dataclass(frozen=True, eq=False)
class StarSeries:
    coeffs: tuple
    q: int
    dmax: int
    u: Any = None

    def __post_init__(self):
        if self.u is None:
            object.__setattr__(self, "u", RF.u())
        if self.dmax < 0:
            raise ValueError("dmax must be non-negative")
        if len(self.coeffs) != self.dmax + 1:
            raise ValueError(f"expected {self.dmax + 1} coefficients, got {len(self.coeffs)}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, q: int, dmax: int, u=None) -> "StarSeries":
        """Pad with zeros (or truncate) to dmax + 1 coefficients."""
        u = RF.u() if u is None else u
        zero = u * 0
        cs = [zero + c for c in list(coeffs)[: dmax + 1]]
        cs += [zero] * (dmax + 1 - len(cs))
        return cls(tuple(cs), q, dmax, u)

    @classmethod
    def one(cls, q: int, dmax: int, u=None) -> "StarSeries":
        return cls.monomial(q, dmax, 0, 1, u)

    @classmethod
    def monomial(cls, q: int, dmax: int, n: int, c=1, u=None) -> "StarSeries":
        u = RF.u() if u is None else u
        zero = u * 0
        cs = [zero] * (dmax + 1)
        if n <= dmax:
            cs[n] = zero + c
        return cls(tuple(cs), q, dmax, u)

    # -- ring structure -------------------------------------------------

    def _check(self, other: "StarSeries") -> None:
        if not isinstance(other, StarSeries):
            raise TypeError("expected a StarSeries")
        if self.q != other.q:
            raise SeriesMismatchError(f"q mismatch: {self.q} vs {other.q}")
        if self.dmax != other.dmax:
            raise SeriesMismatchError(f"dmax mismatch: {self.dmax} vs {other.dmax}")
        if type(self.u) is not type(other.u) or self.u != other.u:
            raise SeriesMismatchError("series are over different coefficient rings")

    def _new(self, coeffs) -> "StarSeries":
        return StarSeries(tuple(coeffs), self.q, self.dmax, self.u)

    def __add__(self, other: "StarSeries") -> "StarSeries":
        self._check(other)
        return self._new(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other: "StarSeries") -> "StarSeries":
        self._check(other)
        return self._new(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self) -> "StarSeries":
        return self._new(-a for a in self.coeffs)

    def scale(self, c) -> "StarSeries":
        return self._new(a * c for a in self.coeffs)

    def __mul__(self, other: "StarSeries") -> "StarSeries":
        """Ordinary (level 0) product."""
        return star_mul(self, other, 0)

    def __pow__(self, J: int) -> "StarSeries":
        return star_pow(self, J, 0)

    def __eq__(self, other):
        if not isinstance(other, StarSeries):
            return NotImplemented
        return (
            self.q == other.q
            and self.dmax == other.dmax
            and type(self.u) is type(other.u)
            and self.u == other.u
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.q, self.dmax, self.coeffs))

    def __getitem__(self, n: int):
        return self.coeffs[n]

    def lowest_degree(self) -> int | None:
        for n, c in enumerate(self.coeffs):
            if not _is_zero(c):
                return n
        return None

    def evaluate(self, t0):
        """Sum of c_n t0**n over the stored coefficients."""
        acc = self.u * 0
        for c in reversed(self.coeffs):
            acc = acc * t0 + c
        return acc

    def map_coeffs(self, fn, u=None) -> "StarSeries":
        """Apply ``fn`` to each coefficient, optionally moving to a new ring element ``u``."""
        return StarSeries(tuple(fn(c) for c in self.coeffs), self.q, self.dmax, self.u if u is None else u)

    def __repr__(self):
        terms = [f"({c})*t^{n}" for n, c in enumerate(self.coeffs) if not _is_zero(c)]
        return f"StarSeries(q={self.q}, dmax={self.dmax}: {' + '.join(terms) or '0'})"

    def to_json(self) -> dict:
        if not isinstance(self.u, RationalFunction):
            return {
                "q": self.q,
                "dmax": self.dmax,
                "coeffs": [_scalar_json(c) for c in self.coeffs],
            }
        return {"q": self.q, "dmax": self.dmax, "coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "StarSeries":
        coeffs = tuple(RationalFunction.from_json(c) for c in data["coeffs"])
        return cls(coeffs, int(data["q"]), int(data["dmax"]))


def _scalar_json(c):
    if isinstance(c, float):
        return c
    f = to_fraction(c)
    return f"{f.numerator}/{f.denominator}"


def star_mul(a: StarSeries, b: StarSeries, level: int) -> StarSeries:
    """Coefficient k is sum_{n+m=k} u**(level n m) a_n b_m."""
    a._check(b)
    d = a.dmax
    u = a.u
    zero = u * 0
    out = [zero] * (d + 1)
    nz_a = [(n, c) for n, c in enumerate(a.coeffs) if not _is_zero(c)]
    nz_b = [(m, c) for m, c in enumerate(b.coeffs) if not _is_zero(c)]
    for n, an in nz_a:
        for m, bm in nz_b:
            k = n + m
            if k > d:
                break
            term = an * bm
            if level and n and m:
                term = term * u ** (level * n * m)
            out[k] = out[k] + term
    return a._new(out)


def star_pow(a: StarSeries, J: int, level: int) -> StarSeries:
    """J-fold star product of ``a`` with itself; J = 0 gives the unit series."""
    if J < 0:
        raise ValueError("J must be non-negative")
    out = StarSeries.one(a.q, a.dmax, a.u)
    for _ in range(J):
        out = star_mul(out, a, level)
    return out


def overline(a: StarSeries, level: int = 1) -> StarSeries:
    u = a.u
    return a._new(c * u ** (level * comb(n, 2)) if n >= 2 and level else c for n, c in enumerate(a.coeffs))


def underline(a: StarSeries, level: int = 1) -> StarSeries:
    u = a.u
    return a._new(c * u ** (-level * comb(n, 2)) if n >= 2 and level else c for n, c in enumerate(a.coeffs))


def substitute_t_scale(a: StarSeries, factor) -> StarSeries:
    """t -> factor * t, i.e. coefficient n times factor**n."""
    if not isinstance(factor, float):
        factor = to_fraction(factor)
    return a._new(c * factor**n if n else c for n, c in enumerate(a.coeffs))


def convolution_identity_check(a: StarSeries, b: StarSeries, level: int = 1) -> bool:
    """overline(a) *_l overline(b) == overline(a b) up to dmax."""
    return star_mul(overline(a, level), overline(b, level), level) == overline(a * b, level)
