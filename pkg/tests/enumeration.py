"""Brute-force oracle: exact Haar averages by enumerating every digit string of length L.

Points of o truncated to L digits are equally likely, so averaging over all
q**(L N) configurations gives the law of the pairwise valuations except for
pairs that agree on all L digits.  Those pairs have valuation >= L, so every
u-Taylor coefficient of order < L is exact.  Shares no code with the package.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def _val(a, b):
    for k, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return k
    return None


def taylor_by_enumeration(q, charges, L, indicator=None):
    """Coefficients c_k, k < L, of E[1_E prod u^(Q_i Q_j v_ij)] for particles with the given charges."""
    N = len(charges)
    points = list(itertools.product(range(q), repeat=L))
    counts = [0] * L
    for config in itertools.product(points, repeat=N):
        if indicator is not None and not indicator(config):
            continue
        k = 0
        for i in range(N):
            for j in range(i + 1, N):
                v = _val(config[i], config[j])
                if v is None:
                    k = L
                    break
                k += charges[i] * charges[j] * v
            if k >= L:
                break
        if k < L:
            counts[k] += 1
    total = len(points) ** N
    return [Fraction(c, total) for c in counts]


def ball_counts(balls, occupancy):
    """Indicator of {N_B = n} for balls given as digit prefixes."""

    def ind(config):
        for digits, n in zip(balls, occupancy):
            r = len(digits)
            if sum(1 for p in config if tuple(p[:r]) == tuple(digits)) != n:
                return False
        return True

    return ind
