"""Several particle species with positive integer charges Q_1..Q_M.

A pair of particles of charges Q, Q' at distance q**-v contributes u**(Q Q' v)
to the Boltzmann weight.  Energy is additive over cosets of m and a
configuration inside m is a contraction of one in o, so with

    E(n) = sum_m Q_m^2 C(n_m, 2) + sum_{l<m} Q_l Q_m n_l n_m,
    Z(n, m) = u^E(n) q^-|n| Z(n, o),

sorting particles into cosets gives Z(N) = N! sum over q-column matrices of
prod_r Z(N^r, m) / N^r!.  The q terms with a single nonzero column equal to
N involve Z(N) itself and are moved to the left-hand side.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod
from typing import Sequence

from .canonical import weak_compositions
from .exactnum import RF

MAX_TOTAL = 12


class PrecisionExhaustedError(ValueError):
    """Two sampled positions agree to the full digit precision."""


@dataclass(frozen=True)
class ChargeProfile:
    charges: tuple[int, ...]
    distinct: bool = True

    def __post_init__(self):
        ch = tuple(int(c) for c in self.charges)
        object.__setattr__(self, "charges", ch)
        if not ch:
            raise ValueError("a charge profile needs at least one species")
        if any(c <= 0 for c in ch):
            raise ValueError("charges must be positive")
        if self.distinct and len(set(ch)) != len(ch):
            raise ValueError("charges must be distinct")

    def __len__(self):
        return len(self.charges)


@dataclass(frozen=True)
class SpeciesCounts:
    counts: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(n) for n in self.counts)
        object.__setattr__(self, "counts", c)
        if any(n < 0 for n in c):
            raise ValueError("species counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)


def _as_profile(profile) -> ChargeProfile:
    return profile if isinstance(profile, ChargeProfile) else ChargeProfile(tuple(profile))


def energy_exponent(charges: Sequence[int], n: Sequence[int]) -> int:
    """E(n): the u-exponent gained when every particle of n is contracted by pi."""
    e = sum(Q * Q * comb(k, 2) for Q, k in zip(charges, n))
    for i in range(len(n)):
        for j in range(i + 1, len(n)):
            e += charges[i] * charges[j] * n[i] * n[j]
    return e


def valuation(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of leading digits on which a and b agree."""
    for k, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return k
    return min(len(a), len(b))


def multi_energy_exponent(charges: Sequence[int], positions: Sequence[Sequence[Sequence[int]]]) -> int:
    """k with Boltzmann weight u**k for per-species digit positions at a common precision L."""
    if len(charges) != len(positions):
        raise ValueError("one position list per species is required")
    flat = [(Q, tuple(p)) for Q, ps in zip(charges, positions) for p in ps]
    lengths = {len(p) for _, p in flat}
    if len(lengths) > 1:
        raise ValueError("all positions must share one digit precision")
    L = lengths.pop() if lengths else 0
    k = 0
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            v = valuation(flat[i][1], flat[j][1])
            if v >= L:
                raise PrecisionExhaustedError(f"two positions coincide to depth {L}")
            k += flat[i][0] * flat[j][0] * v
    return k


class MultiTable:
    """Memo table of Z(N, o) for one charge profile over a coefficient ring."""

    def __init__(self, q: int, charges: tuple[int, ...], u=None):
        if q < 2:
            raise ValueError("q must be at least 2")
        self.q = q
        self.charges = charges
        self.u = RF.u() if u is None else u
        self._zero = self.u * 0
        self._one = self._zero + 1
        self.entries: dict[tuple[int, ...], object] = {}
        self._w: dict[tuple[int, ...], object] = {}
        # partial[j][n] = coefficient of t^n in (sum_k w_k t^k)^(j+1)
        self._partial: list[dict] = [dict() for _ in range(q)]
        self._lock = threading.Lock()
        zero_idx = (0,) * len(charges)
        self.entries[zero_idx] = self._w[zero_idx] = self._one
        for part in self._partial:
            part[zero_idx] = self._one

    def _store(self, n, z, excl) -> None:
        self.entries[n] = z
        w = self.u ** energy_exponent(self.charges, n) * Fraction(1, self.q ** sum(n)) * z / prod(factorial(k) for k in n)
        self._w[n] = w
        for j in range(self.q):
            self._partial[j][n] = excl[j] + w * (j + 1)

    def __getitem__(self, n: Sequence[int]):
        n = tuple(n)
        if len(n) != len(self.charges):
            raise ValueError("counts and charge profile differ in length")
        if n not in self.entries:
            with self._lock:
                for m in sorted(itertools.product(*(range(k + 1) for k in n)), key=sum):
                    if m not in self.entries:
                        self._step(m)
        return self.entries[n]

    def _step(self, n: tuple[int, ...]) -> None:
        total = sum(n)
        subs = [k for k in itertools.product(*(range(c + 1) for c in n)) if 0 < sum(k) < total]
        excl = [self._zero]
        for j in range(1, self.q):
            acc = excl[j - 1]
            prev = self._partial[j - 1]
            for k in subs:
                acc = acc + self._w[k] * prev[tuple(a - b for a, b in zip(n, k))]
            excl.append(acc)
        if total == 1:
            z = self._one
        else:
            e = energy_exponent(self.charges, n)
            z = excl[self.q - 1] * prod(factorial(k) for k in n) / (1 - self.u**e * Fraction(1, self.q ** (total - 1)))
        self._store(n, z, excl)


# typed: 0.5 and Fraction(1, 2) hash alike but need separate tables
@lru_cache(maxsize=None, typed=True)
def multi_table(q: int, charges: tuple[int, ...], u=None) -> MultiTable:
    return MultiTable(q, charges, u)


def multi_canonical_Z(q: int, profile, counts, u=None):
    """Z(N, o, beta) for species counts N and charges Q, as a rational function of u."""
    prof = _as_profile(profile)
    cnt = counts if isinstance(counts, SpeciesCounts) else SpeciesCounts(tuple(counts))
    if len(cnt.counts) != len(prof):
        raise ValueError("counts and charge profile differ in length")
    if cnt.total > MAX_TOTAL:
        raise ValueError(f"total particle count {cnt.total} exceeds the limit of {MAX_TOTAL}")
    if isinstance(u, int):
        u = Fraction(u)
    return multi_table(q, prof.charges, u)[cnt.counts]


def multi_indices(nvars: int, dmax: int) -> list[tuple[int, ...]]:
    """All multi-indices of total degree <= dmax, ordered by total degree."""
    return [k for d in range(dmax + 1) for k in weak_compositions(d, nvars)]


@dataclass(frozen=True, eq=False)
class MultiSeries:
    """Series in t_1..t_M truncated at total degree dmax; coeffs maps multi-index to value."""

    nvars: int
    dmax: int
    coeffs: dict
    u: object = None

    def __post_init__(self):
        if self.u is None:
            object.__setattr__(self, "u", RF.u())
        zero = self.u * 0
        full = {k: zero for k in multi_indices(self.nvars, self.dmax)}
        for k, v in self.coeffs.items():
            if len(k) != self.nvars:
                raise ValueError(f"multi-index {k} has the wrong length")
            if sum(k) <= self.dmax:
                full[tuple(k)] = zero + v
        object.__setattr__(self, "coeffs", full)

    def __getitem__(self, k):
        return self.coeffs[tuple(k)]

    def _check(self, other: "MultiSeries"):
        if self.nvars != other.nvars or self.dmax != other.dmax:
            raise ValueError("series differ in variables or truncation degree")

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        self._check(other)
        out: dict = {}
        nz_a = [(k, v) for k, v in self.coeffs.items() if v != 0]
        nz_b = [(k, v) for k, v in other.coeffs.items() if v != 0]
        for ka, va in nz_a:
            da = sum(ka)
            for kb, vb in nz_b:
                if da + sum(kb) > self.dmax:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out[k] + va * vb if k in out else va * vb
        return MultiSeries(self.nvars, self.dmax, out, self.u)

    def __pow__(self, J: int) -> "MultiSeries":
        out = MultiSeries(self.nvars, self.dmax, {(0,) * self.nvars: 1}, self.u)
        for _ in range(J):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.nvars == other.nvars and self.dmax == other.dmax and all(
            self.coeffs[k] == other.coeffs[k] for k in self.coeffs
        )

    __hash__ = None


def multi_gc_series(q: int, profile, dmax: int, contracted: bool = False, u=None) -> MultiSeries:
    """Z(t, o) (or Z(t, m) when ``contracted``) as a truncated multivariate series."""
    prof = _as_profile(profile)
    uu = RF.u() if u is None else u
    coeffs = {}
    for k in multi_indices(len(prof), dmax):
        c = multi_canonical_Z(q, prof, k, u) / prod(factorial(x) for x in k)
        if contracted and any(k):
            c = c * uu ** energy_exponent(prof.charges, k) * Fraction(1, q ** sum(k))
        coeffs[k] = c
    return MultiSeries(len(prof), dmax, coeffs, uu)


def verify_multi_qpower(q: int, profile, dmax: int, u=None) -> bool:
    """Z(t, o) == Z(t, m)**q for the multi-species series."""
    return multi_gc_series(q, profile, dmax, False, u) == multi_gc_series(q, profile, dmax, True, u) ** q
