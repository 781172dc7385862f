"""Grand canonical partition functions Z(t, pi^l o, beta) = sum_N Z(N, pi^l o) t^N / N!.

Coefficients come from the canonical table with ball scaling, so every series
can be built over rational functions of u or over a fixed numeric u0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .canonical import canonical_table
from .exactnum import RF
from .starring import StarSeries, overline, star_pow, substitute_t_scale


def gc_Z(q: int, ell: int, dmax: int, u=None) -> StarSeries:
    """Z(t, pi^ell o, beta) truncated at t^dmax; ell = 0 is o itself."""
    if ell < 0:
        raise ValueError("ell must be non-negative (fractional ideals are not supported)")
    if dmax < 0:
        raise ValueError("dmax must be non-negative")
    u = RF.u() if u is None else u
    table = canonical_table(q, None if isinstance(u, RF) else u)
    coeffs = []
    for n in range(dmax + 1):
        c = table[n] / factorial(n)
        if ell and n:
            c = c * u ** (ell * comb(n, 2)) * Fraction(1, q ** (ell * n))
        coeffs.append(c)
    return StarSeries(tuple(coeffs), q, dmax, u)


def verify_gcz(q: int, dmax: int, u=None) -> bool:
    """Z(t, o) == Z(t, m)**q under the ordinary product."""
    return gc_Z(q, 0, dmax, u) == gc_Z(q, 1, dmax, u) ** q


def verify_functional_equation(q: int, dmax: int, u=None) -> bool:
    """Z(t, o) == overline(Z(t/q, o))**q."""
    z = gc_Z(q, 0, dmax, u)
    return z == overline(substitute_t_scale(z, Fraction(1, q)), 1) ** q


def verify_gc_scaling(q: int, ell: int, dmax: int, u=None) -> bool:
    """Z(t, pi^ell o) == overline^ell(Z(t / q^ell, o))."""
    z = gc_Z(q, 0, dmax, u)
    return gc_Z(q, ell, dmax, u) == overline(substitute_t_scale(z, Fraction(1, q**ell)), ell)


def verify_thm4(q: int, ell: int, dmax: int, u=None) -> bool:
    """Z(t, pi^ell o) == Z(t, pi^(ell+1) o) raised to the q-th star^ell power."""
    return gc_Z(q, ell, dmax, u) == star_pow(gc_Z(q, ell + 1, dmax, u), q, ell)


def exp_tail_bound(t0, nmax: int) -> float:
    """Upper bound on sum_{N > nmax} t0^N / N!, valid once t0 < nmax + 2."""
    t0 = float(t0)
    if t0 == 0:
        return 0.0
    if t0 >= nmax + 2:
        return math.inf
    log_first = (nmax + 1) * math.log(t0) - math.lgamma(nmax + 2)
    return math.exp(log_first) / (1 - t0 / (nmax + 2))


class TruncationError(ValueError):
    """The requested truncation cannot certify the requested accuracy."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


@dataclass(frozen=True)
class OccupancyPMF:
    weights: tuple  # Z(N)(u0) t0^N / N!, N = 0..nmax
    normalizer: object  # sum of the weights, a lower bound on Z(t0, o)
    tail_bound: float  # Z(t0, o) - normalizer lies in [0, tail_bound]

    @property
    def probabilities(self) -> tuple:
        return tuple(w / self.normalizer for w in self.weights)

    @property
    def error_bound(self) -> float:
        """Bound on |weights[N]/normalizer - P{N_o = N}| for every N."""
        return self.tail_bound / float(self.normalizer)


def _check_u0(u0) -> None:
    if not 0 <= u0 <= 1:
        raise ValueError("u0 must lie in [0, 1] (non-negative beta)")


def occupancy_pmf(q: int, t0, u0, nmax: int, rel_tol: float = 1e-12) -> OccupancyPMF:
    """Law of N_o at fugacity t0 and u0 = q**-beta, truncated at nmax with a certified tail.

    Z(N, o) <= 1 for u0 in [0, 1], so the tail is dominated by that of e^t0.
    """
    _check_u0(u0)
    if t0 < 0:
        raise ValueError("t0 must be non-negative")
    table = canonical_table(q, u0 if not isinstance(u0, int) else Fraction(u0))
    weights = []
    tpow = t0 * 0 + 1
    for n in range(nmax + 1):
        weights.append(table[n] * tpow / factorial(n))
        tpow = tpow * t0
    S = sum(weights[1:], weights[0])
    tail = exp_tail_bound(t0, nmax)
    if tail > rel_tol * float(S):
        need = nmax + 1
        while exp_tail_bound(t0, need) > rel_tol * float(S):
            need += 1
        raise TruncationError(f"truncation at nmax={nmax} is too coarse; need nmax >= {need}", need)
    return OccupancyPMF(tuple(weights), S, tail)


def gc_potential(q: int, t0: float, beta: float, rel_tol: float = 1e-12) -> float:
    """-(1/beta) log Z(t0, o, beta) at numeric beta > 0, truncated where the tail bound allows."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    nmax = 0
    # the normalizer is at least 1 (the N = 0 term), so this tail suffices
    while exp_tail_bound(t0, nmax) > rel_tol:
        nmax += 1
    pmf = occupancy_pmf(q, float(t0), float(q) ** (-beta), nmax, rel_tol)
    return -math.log(float(pmf.normalizer)) / beta
