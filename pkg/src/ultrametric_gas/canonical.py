"""Canonical partition functions Z(N, V, beta) for V = o and for balls in o.

Z(N, o, beta) is computed as a rational function R_N(u) of u = q**(-beta) by
sorting the N particles into the q cosets of the maximal ideal.  Writing
w_n = u**C(n,2) Z(n) / n!, the occupancy-vector sum is

    Z(N) * (q**N - q * u**C(N,2)) = N! * sum' prod_r w_{n_r}

where sum' runs over weak compositions of N into q parts other than the q
vectors placing every particle in one coset.  The sum is accumulated with
memoized partial sums over compositions, so each new N costs O(q N) ring
operations.

The same table can be built over exact rationals (u = a fixed rational) or
floats, which is how numeric-temperature values are obtained without
expanding huge rational functions.
"""
from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Iterator, Sequence

from .exactnum import RF, RationalFunction, UPoly, rf_has_root_in_common, rf_taylor


def weak_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def count_weak_compositions(total: int, parts: int) -> int:
    if parts == 0:
        return 1 if total == 0 else 0
    return comb(total + parts - 1, parts - 1)


FLOAT_MAX_N = 170


class CanonicalTable:
    """Memo table of Z(N, o, beta) for a fixed q, extended bottom-up on demand.

    ``u`` is the ring element standing for q**(-beta): the indeterminate
    (default, giving ``RationalFunction`` entries), a ``Fraction`` or a float.
    """

    def __init__(self, q: int, u=None):
        if q < 2:
            raise ValueError("q must be at least 2")
        self.q = q
        self.u = RF.u() if u is None else u
        zero = self.u * 0
        self._one = zero + 1
        self.entries = [self._one, self._one]
        # partial[j - 1][m] = sum over compositions of m into j parts of prod w
        self._w = [self._one, self._one]
        self._partial = [[self._one, self._one] for _ in range(q - 1)]
        for j in range(1, q - 1):
            self._partial[j][1] = self._one * (j + 1)
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, n: int):
        if n < 0:
            raise ValueError("particle count must be non-negative")
        if n >= len(self.entries):
            self.extend(n)
        return self.entries[n]

    def extend(self, n_max: int) -> None:
        if isinstance(self.u, float) and n_max > FLOAT_MAX_N:
            raise ValueError(f"float tables stop at N={FLOAT_MAX_N}: N! overflows a double beyond that")
        with self._lock:
            while len(self.entries) <= n_max:
                self._step()

    def _step(self) -> None:
        q, u = self.q, self.u
        N = len(self.entries)
        w, S = self._w, self._partial
        # excl[j] = compositions of N into j+1 parts with no part equal to N
        excl = [self.u * 0]
        for j in range(1, q):
            acc = excl[j - 1]
            prev = S[j - 1]
            for k in range(1, N):
                acc = acc + w[k] * prev[N - k]
            excl.append(acc)
        c = comb(N, 2)
        z = excl[q - 1] * factorial(N) / (q**N - q * u**c)
        self.entries.append(z)
        wN = u**c * z / factorial(N)
        w.append(wN)
        for j in range(q - 1):
            S[j].append(excl[j] + wN * (j + 1))


# typed: 0.5 and Fraction(1, 2) hash alike but need separate tables
@lru_cache(maxsize=None, typed=True)
def canonical_table(q: int, u=None) -> CanonicalTable:
    return CanonicalTable(q, u)


def canonical_Z(q: int, N: int) -> RationalFunction:
    """Z(N, o, beta) as a rational function of u = q**(-beta)."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return canonical_table(q)[N]


def canonical_Z_value(q: int, N: int, u0):
    """Z(N, o, beta) at a fixed u0 = q**(-beta), computed directly in the ring of u0."""
    if N < 0:
        raise ValueError("N must be non-negative")
    if isinstance(u0, int):
        u0 = Fraction(u0)
    return canonical_table(q, u0)[N]


def ball_scaling(q: int, N: int, r: int, u=None):
    """u**(r C(N,2)) * q**(-r N): the factor relating Z(N, zeta + pi^r o) to Z(N, o)."""
    u = RF.u() if u is None else u
    return u ** (r * comb(N, 2)) * Fraction(1, q ** (r * N))


def canonical_Z_ball(q: int, N: int, r: int) -> RationalFunction:
    if N < 0 or r < 0:
        raise ValueError("N and r must be non-negative")
    return ball_scaling(q, N, r) * canonical_Z(q, N)


def energy_distribution(q: int, N: int, Kmax: int) -> list[Fraction]:
    """p_k = P(|Delta_N| = q**-k) for independent uniform points, k = 0..Kmax."""
    return rf_taylor(canonical_Z(q, N), Kmax)


def unsolved_recursion_rhs(q: int, N: int, zfunc: Callable[[int], RationalFunction] | None = None):
    """N! sum_n prod_r Z(n_r, m)/n_r! over *all* occupancy vectors, by brute-force enumeration.

    Equals Z(N, o) when the table is right; used as an independent check of
    the solved recursion.
    """
    zfunc = zfunc or (lambda n: canonical_Z(q, n))
    zm = [ball_scaling(q, n, 1) * zfunc(n) / factorial(n) for n in range(N + 1)]
    total = RF.const(0)
    for occ in weak_compositions(N, q):
        term = RF.const(1)
        for n in occ:
            if n:
                term = term * zm[n]
        total = total + term
    return total * factorial(N)


def quad_rec_residual(q: int, N: int, zfunc: Callable[[int], RationalFunction] | None = None):
    zfunc = zfunc or (lambda n: canonical_Z(q, n))
    u = RF.u()
    total = RF.const(0)
    for n in range(N + 1):
        coef = Fraction(N - (q + 1) * n, factorial(n) * factorial(N - n) * q**n)
        if coef:
            total = total + u ** comb(n, 2) * zfunc(n) * zfunc(N - n) * coef
    return total


def verify_quad_rec(q: int, N: int, zfunc: Callable[[int], RationalFunction] | None = None) -> bool:
    """Check sum_n (N-(q+1)n)/(n!(N-n)!) u^C(n,2) q^-n Z(n) Z(N-n) == 0 exactly."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return quad_rec_residual(q, N, zfunc).is_zero()


def pole_test_polynomial(q: int, N: int) -> UPoly:
    """u**N - q**2, whose roots are the points u = q**(2/N) (beta = -2/N)."""
    return UPoly.monomial(N) - UPoly([q * q])


def abscissa_check(q: int, N: int) -> bool:
    """True iff the denominator of R_N shares a root with u**N - q**2."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return rf_has_root_in_common(canonical_Z(q, N).den, pole_test_polynomial(q, N))


def zero_temperature_value(q: int, N: int) -> Fraction:
    """R_N(0) = q! / ((q-N)! q**N), zero for N > q."""
    if N > q:
        return Fraction(0)
    return Fraction(factorial(q), factorial(q - N) * q**N)


def table_snapshot(q: int, n_max: int) -> Sequence[RationalFunction]:
    t = canonical_table(q)
    t.extend(n_max)
    return tuple(t.entries[: n_max + 1])
