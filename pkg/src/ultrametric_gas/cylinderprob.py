"""Probabilities of cylinder events {N_B = n} in the canonical and grand canonical ensembles.

For a family of disjoint balls B_1..B_M covering o with occupancy n,

    P_N = N!/Z(N) * prod_{k<l} u^(d_kl n_k n_l) * prod_m Z(n_m, B_m)/n_m!,

where q**-d_kl is the (constant) distance between B_k and B_l.  Events that
do not cover o are completed with the minimal complement and summed over the
complement occupancies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod
from typing import Iterable, Sequence

from .canonical import canonical_table, count_weak_compositions, weak_compositions
from .exactnum import RF
from .grandcanonical import TruncationError, _check_u0, exp_tail_bound, gc_Z
from .starring import StarSeries, overline, substitute_t_scale
from .ultrametric import (
    Ball,
    BallFamily,
    ball_distance,
    complement,
    descend,
    parse_ball,
    push_into,
)

MAX_COMPOSITIONS = 10**7


class CompositionLimitError(RuntimeError):
    """Complement enumeration would exceed the composition budget."""


@dataclass(frozen=True)
class CylinderEvent:
    family: BallFamily
    occupancy: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupancy)
        object.__setattr__(self, "occupancy", occ)
        if len(occ) != len(self.family):
            raise ValueError(f"{len(self.family)} balls but {len(occ)} occupancy counts")
        if any(n < 0 for n in occ):
            raise ValueError("occupancy counts must be non-negative")

    @classmethod
    def of(cls, q: int, pairs: Iterable[tuple[Sequence[int], int]]) -> "CylinderEvent":
        pairs = list(pairs)
        fam = BallFamily(q, tuple(Ball(q, tuple(d)) for d, _ in pairs))
        return cls(fam, tuple(n for _, n in pairs))

    @classmethod
    def empty(cls, q: int) -> "CylinderEvent":
        return cls(BallFamily(q, ()), ())

    @property
    def q(self) -> int:
        return self.family.q

    @property
    def balls(self) -> tuple[Ball, ...]:
        return self.family.balls

    @property
    def total(self) -> int:
        return sum(self.occupancy)

    def items(self):
        return zip(self.family.balls, self.occupancy)

    def __str__(self):
        return ",".join(f"{b}={n}" for b, n in self.items())


def parse_event(text: str, q: int | None = None) -> CylinderEvent:
    """Parse "5:1:1=6,5:2:2.3=4" into a CylinderEvent."""
    pairs = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        spec, _, count = part.partition("=")
        if not count:
            raise ValueError(f"ball spec {part!r} is missing '=count'")
        pairs.append((parse_ball(spec), int(count)))
    qs = {b.q for b, _ in pairs} | ({q} if q is not None else set())
    if len(qs) > 1:
        raise ValueError(f"inconsistent q values in event: {sorted(qs)}")
    if not qs:
        raise ValueError("cannot infer q from an empty event")
    qq = qs.pop()
    return CylinderEvent(BallFamily(qq, tuple(b for b, _ in pairs)), tuple(n for _, n in pairs))


# -- canonical ensemble -------------------------------------------------------


class _Ring:
    """Coefficient ring for a computation: rational functions of u or a fixed u0."""

    def __init__(self, q: int, u=None):
        if isinstance(u, int):
            u = Fraction(u)
        self.q = q
        self.u = RF.u() if u is None else u
        self.table = canonical_table(q, None if isinstance(self.u, RF) else u)
        self.one = self.u * 0 + 1
        self._single: dict[tuple[int, int], object] = {}

    def Z(self, n: int):
        return self.table[n]

    def single(self, r: int, n: int):
        """Z(n, ball of radius q^-r) / n!."""
        key = (r, n)
        if key not in self._single:
            v = self.table[n] / factorial(n)
            if r and n:
                v = v * self.u ** (r * comb(n, 2)) * Fraction(1, self.q ** (r * n))
            self._single[key] = v
        return self._single[key]


def _distance_matrix(balls: Sequence[Ball]) -> list[list[int]]:
    k = len(balls)
    d = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            d[i][j] = d[j][i] = ball_distance(balls[i], balls[j])
    return d


def _unnormalized(ring: _Ring, balls: Sequence[Ball], dist, occ: Sequence[int]):
    """prod_{k<l} u^(d n_k n_l) prod_m Z(n_m, B_m)/n_m! for one occupancy vector."""
    e = 0
    term = ring.one
    for i, ni in enumerate(occ):
        if not ni:
            continue
        term = term * ring.single(balls[i].r, ni)
        for j in range(i + 1, len(occ)):
            if occ[j]:
                e += dist[i][j] * ni * occ[j]
    if e:
        term = term * ring.u**e
    return term


def _covering(family: BallFamily) -> bool:
    return family.measure == 1


def prob_canonical_full(q: int, N: int, event: CylinderEvent, u=None):
    """P_N{N_B = n} for a family covering o with sum(n) == N."""
    if event.q != q:
        raise ValueError(f"event is over q={event.q}, expected q={q}")
    if event.total != N:
        raise ValueError(f"occupancy sums to {event.total}, expected N={N}")
    if not _covering(event.family):
        raise ValueError("family does not cover o; use prob_canonical for partial events")
    ring = _Ring(q, u)
    balls = event.balls
    term = _unnormalized(ring, balls, _distance_matrix(balls), event.occupancy)
    return term * factorial(N) / ring.Z(N)


def _sum_over_groups(ring: _Ring, N: int, fixed: Sequence[tuple[Ball, int]], groups: Sequence[tuple[Sequence[Ball], int]]):
    """N!/Z(N) times the sum of unnormalized weights over all ways to fill each group.

    ``fixed`` balls carry given counts; each group is a list of balls whose
    counts range over weak compositions of the group total.  Fixed and group
    balls together must cover o.
    """
    balls = [b for b, _ in fixed] + [b for g, _ in groups for b in g]
    if sum((b.measure for b in balls), Fraction(0)) != 1:
        raise ValueError("balls do not cover o")
    BallFamily(ring.q, tuple(balls))
    if any(t < 0 for _, t in groups):
        return ring.one * 0
    n_terms = prod(count_weak_compositions(t, len(g)) for g, t in groups)
    if n_terms > MAX_COMPOSITIONS:
        raise CompositionLimitError(f"{n_terms} complement occupancies exceed the limit of {MAX_COMPOSITIONS}")
    dist = _distance_matrix(balls)
    base = [n for _, n in fixed]
    total = ring.one * 0
    for parts in itertools.product(*(weak_compositions(t, len(g)) for g, t in groups)):
        occ = base + [n for p in parts for n in p]
        total = total + _unnormalized(ring, balls, dist, occ)
    return total * factorial(N) / ring.Z(N)


def prob_canonical(q: int, N: int, event: CylinderEvent, u=None):
    """P_N{N_B = n} for any disjoint family, summing over the complement's occupancies."""
    if event.q != q:
        raise ValueError(f"event is over q={event.q}, expected q={q}")
    if event.total > N:
        raise ValueError(f"event places {event.total} particles but N={N}")
    ring = _Ring(q, u)
    comp = complement(event.family)
    return _sum_over_groups(ring, N, list(event.items()), [(comp.balls, N - event.total)])


def push_down_event(event: CylinderEvent, prefix: Sequence[int]) -> CylinderEvent:
    """Image of an event on o under alpha -> zeta + pi^r alpha, zeta having digits ``prefix``."""
    fam = BallFamily(event.q, tuple(push_into(b, prefix) for b in event.balls))
    return CylinderEvent(fam, event.occupancy)


def prob_all_in_ball(q: int, n: int, event: CylinderEvent, prefix: Sequence[int], u=None):
    """P_n of the pushed event: every particle in zeta + pi^r o, pushed constraints hold."""
    ring = _Ring(q, u)
    ball = Ball(q, tuple(prefix))
    pushed = push_down_event(event, prefix)
    inner = complement(pushed.family, ball)
    outer = complement(BallFamily(q, (ball,)))
    return _sum_over_groups(ring, n, list(pushed.items()), [(inner.balls, n - event.total), (outer.balls, 0)])


def push_down_check(q: int, n: int, event: CylinderEvent, prefix: Sequence[int]) -> bool:
    """P_n(zeta + pi^r E) == u^(r C(n,2)) q^(-r n) P_n(E), exactly."""
    r = len(prefix)
    lhs = prob_all_in_ball(q, n, event, prefix)
    rhs = prob_canonical(q, n, event) * RF.u_power(r * comb(n, 2)) * Fraction(1, q ** (r * n))
    return lhs == rhs


def _joint_with_ball_total(ring: _Ring, N: int, B: Ball, n: int, inner: CylinderEvent, outer: CylinderEvent):
    """P_N(inner and outer and N_B = n)."""
    for b in inner.balls:
        if not B.contains(b):
            raise ValueError(f"inner ball {b} is not inside {B}")
    for b in outer.balls:
        if B.contains(b) or b.contains(B):
            raise ValueError(f"outer ball {b} meets {B}")
    q = ring.q
    in_comp = complement(inner.family, B)
    out_comp = complement(BallFamily(q, tuple(outer.balls) + (B,)))
    fixed = list(inner.items()) + list(outer.items())
    groups = [(in_comp.balls, n - inner.total), (out_comp.balls, N - n - outer.total)]
    return _sum_over_groups(ring, N, fixed, groups)


def conditional_factorization_check(
    q: int, N: int, B: Ball, n: int, inner: CylinderEvent, outer: CylinderEvent, u=None
) -> bool:
    """Conditional independence of inside/outside events given N_B = n, and the restriction law.

    Checks P(inner, outer | N_B=n) == P(inner | N_B=n) P(outer | N_B=n) and
    P(inner | N_B=n) == P_n(inner pulled back to o).
    """
    ring = _Ring(q, u)
    empty = CylinderEvent.empty(q)
    p_b = _joint_with_ball_total(ring, N, B, n, empty, empty)
    if p_b == 0:
        raise ValueError(f"P(N_B = {n}) vanishes; conditioning is undefined")
    p_in = _joint_with_ball_total(ring, N, B, n, inner, empty) / p_b
    p_out = _joint_with_ball_total(ring, N, B, n, empty, outer) / p_b
    p_both = _joint_with_ball_total(ring, N, B, n, inner, outer) / p_b
    pulled = CylinderEvent(
        BallFamily(q, tuple(Ball(q, b.digits[B.r :]) for b in inner.balls)), inner.occupancy
    )
    restricted = prob_canonical(q, n, pulled, u) if inner.total <= n else ring.one * 0
    return p_both == p_in * p_out and p_in == restricted


def cross_ball_exponent(event: CylinderEvent) -> int:
    """Exponent k with prod_{k<l} |zeta_l - zeta_k|^(beta n_k n_l) = u^k."""
    d = _distance_matrix(event.balls)
    occ = event.occupancy
    return sum(d[i][j] * occ[i] * occ[j] for i in range(len(occ)) for j in range(i + 1, len(occ)))


# -- grand canonical ensemble -------------------------------------------------


def gc_cylinder_gf(q: int, event: CylinderEvent, dmax: int, u=None) -> StarSeries:
    """Z(t, {N_B = n}, beta): sum_N Z(N) P_N{N_B = n} t^N / N!, truncated at dmax.

    Recursion over the coset tree: each coset of m contributes
    overline(G(t/q)) where G is the series of the pulled-back sub-event, an
    unconstrained coset contributes Z(t, m), and {N_o = n} is the monomial
    Z(n) t^n / n!.
    """
    if event.q != q:
        raise ValueError(f"event is over q={event.q}, expected q={q}")
    u = RF.u() if u is None else (Fraction(u) if isinstance(u, int) else u)
    return _gc_rec(q, tuple(event.items()), dmax, u)


def _gc_rec(q: int, items: tuple, dmax: int, u) -> StarSeries:
    if not items:
        return gc_Z(q, 0, dmax, u)
    if len(items) == 1 and items[0][0].r == 0:
        n = items[0][1]
        table = canonical_table(q, None if isinstance(u, RF) else u)
        return StarSeries.monomial(q, dmax, n, table[n] / factorial(n), u) if n <= dmax else StarSeries.from_coeffs([], q, dmax, u)
    groups: list[list] = [[] for _ in range(q)]
    for b, n in items:
        groups[b.digits[0]].append((descend(b), n))
    out = StarSeries.one(q, dmax, u)
    for g in groups:
        sub = _gc_rec(q, tuple(g), dmax, u)
        out = out * overline(substitute_t_scale(sub, Fraction(1, q)), 1)
    return out


@dataclass(frozen=True)
class GCProbability:
    value: object  # exact Fraction when t0 and u0 are exact, else float
    error_bound: float
    dmax: int


def gc_cylinder_prob(q: int, event: CylinderEvent, t0, u0, tolerance: float = 1e-12, dmax_limit: int = 512) -> GCProbability:
    """P(N_B = n) at fugacity t0 and u0 = q**-beta, with a certified truncation bound.

    Both the event series and Z(t, o) have coefficients at most 1/N! when
    u0 lies in [0, 1], so the exponential tail controls each truncation.
    """
    _check_u0(u0)
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    if isinstance(u0, int):
        u0 = Fraction(u0)
    dmax = max(8, event.total + 4)
    while True:
        tail = exp_tail_bound(t0, dmax)
        if tail < float("inf"):
            num = gc_cylinder_gf(q, event, dmax, u0).evaluate(t0)
            den = gc_Z(q, 0, dmax, u0).evaluate(t0)
            bound = tail / float(den)
            if bound <= tolerance:
                return GCProbability(num / den, bound, dmax)
        if dmax >= dmax_limit:
            raise TruncationError(f"tolerance {tolerance} not reached by dmax={dmax_limit}")
        dmax = min(2 * dmax, dmax_limit)
