import math
import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enumeration import ball_counts, taylor_by_enumeration
from ultrametric_gas.acceptance import covering_families, five_adic_closed_form, random_event
from ultrametric_gas.canonical import canonical_Z, weak_compositions
from ultrametric_gas.cylinderprob import (
    MAX_COMPOSITIONS,
    CompositionLimitError,
    CylinderEvent,
    conditional_factorization_check,
    cross_ball_exponent,
    gc_cylinder_gf,
    gc_cylinder_prob,
    parse_event,
    prob_all_in_ball,
    prob_canonical,
    prob_canonical_full,
    push_down_check,
)
from ultrametric_gas.exactnum import RF, rf_eval, rf_taylor
from ultrametric_gas.grandcanonical import TruncationError, gc_Z
from ultrametric_gas.multicomponent import multi_energy_exponent, valuation
from ultrametric_gas.ultrametric import Ball, BallFamily

u = RF.u()


class TestBinaryExamples:
    def test_two_particles_in_halves(self):
        half = CylinderEvent.of(2, [((0,), 1), ((1,), 1)])
        assert prob_canonical_full(2, 2, half) == 1 - u / 2

    def test_two_particles_together(self):
        both = CylinderEvent.of(2, [((0,), 2), ((1,), 0)])
        assert prob_canonical_full(2, 2, both) == u / 4

    def test_total_is_one(self):
        p = [prob_canonical_full(2, 2, CylinderEvent.of(2, [((0,), a), ((1,), 2 - a)])) for a in range(3)]
        assert p[0] + p[1] + p[2] == 1

    def test_infinite_temperature_is_multinomial(self):
        ev = CylinderEvent.of(3, [((0,), 2), ((1,), 1), ((2,), 1)])
        assert rf_eval(prob_canonical_full(3, 4, ev), 1) == Fraction(12, 81)


class TestAgainstEnumeration:
    @pytest.mark.parametrize(
        "q,N,pairs,L",
        [
            (2, 2, [((0,), 1)], 5),
            (2, 3, [((0,), 2)], 4),
            (2, 3, [((0, 1), 1), ((1,), 1)], 4),
            (3, 3, [((1,), 1), ((2, 0), 1)], 3),
            (3, 2, [((0,), 0)], 4),
        ],
    )
    def test_numerator_taylor(self, q, N, pairs, L):
        ev = CylinderEvent.of(q, pairs)
        numerator = prob_canonical(q, N, ev) * canonical_Z(q, N)
        expected = taylor_by_enumeration(q, [1] * N, L, ball_counts([d for d, _ in pairs], [n for _, n in pairs]))
        assert rf_taylor(numerator, L - 1) == expected


@pytest.mark.parametrize("q", [2, 3])
def test_total_probability_over_covering_families(q):
    for fam in covering_families(q, 4):
        for N in range(5):
            total = RF.const(0)
            for occ in weak_compositions(N, len(fam)):
                total = total + prob_canonical_full(q, N, CylinderEvent(fam, occ))
            assert total == 1


def test_partial_event_marginalizes_full_events():
    q, N = 2, 3
    partial = CylinderEvent.of(q, [((0, 0), 1)])
    fam = BallFamily(q, (Ball(q, (0, 0)), Ball(q, (0, 1)), Ball(q, (1,))))
    total = RF.const(0)
    for a in range(N):
        total = total + prob_canonical_full(q, N, CylinderEvent(fam, (1, a, N - 1 - a)))
    assert prob_canonical(q, N, partial) == total


def test_partial_event_at_fixed_u_matches_rational_function():
    ev = parse_event("3:1:0=1,3:2:1.2=1")
    assert prob_canonical(3, 4, ev, Fraction(1, 3)) == rf_eval(prob_canonical(3, 4, ev), Fraction(1, 3))


def test_event_too_large():
    with pytest.raises(ValueError):
        prob_canonical(2, 1, CylinderEvent.of(2, [((0,), 2)]))


def test_composition_guard():
    assert MAX_COMPOSITIONS == 10**7
    fam_event = CylinderEvent.of(7, [((0, 0, 0), 0)])
    with pytest.raises(CompositionLimitError):
        prob_canonical(7, 40, fam_event)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_push_down_scaling(seed):
    rng = random.Random(seed)
    q = rng.choice((2, 3))
    ev = random_event(rng, q, max_total=2)
    n = rng.randint(max(ev.total, 1), 4)
    prefix = tuple(rng.randrange(q) for _ in range(rng.randint(1, 2)))
    assert push_down_check(q, n, ev, prefix)


def test_all_in_ball_of_empty_event():
    # every particle in one coset of m
    ev = CylinderEvent.empty(2)
    assert prob_all_in_ball(2, 2, ev, (0,)) == u / 4


class TestConditionalFactorization:
    def test_binary(self):
        B = Ball(2, (0,))
        inner = CylinderEvent.of(2, [((0, 1), 1)])
        outer = CylinderEvent.of(2, [((1, 1), 1)])
        assert conditional_factorization_check(2, 4, B, 2, inner, outer)

    def test_ternary_deep(self):
        B = Ball(3, (2, 1))
        inner = CylinderEvent.of(3, [((2, 1, 0), 1), ((2, 1, 2), 1)])
        outer = CylinderEvent.of(3, [((0,), 1)])
        assert conditional_factorization_check(3, 4, B, 2, inner, outer)

    def test_rejects_misplaced_balls(self):
        B = Ball(2, (0,))
        bad = CylinderEvent.of(2, [((1,), 1)])
        with pytest.raises(ValueError):
            conditional_factorization_check(2, 3, B, 1, bad, CylinderEvent.empty(2))


def test_cross_ball_exponent_matches_pointwise_energy():
    ev = parse_event("3:1:0=2,3:2:1.0=1,3:2:1.2=1")
    # centers padded to depth 3 so every pair has a definite valuation across balls
    centers = [(0, 0, 0), (1, 0, 0), (1, 2, 0)]
    counts = ev.occupancy
    positions = [[c] * n for c, n in zip(centers, counts)]
    flat = [p for ps in positions for p in ps]
    cross = 0
    owner = [i for i, n in enumerate(counts) for _ in range(n)]
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            if owner[i] != owner[j]:
                cross += valuation(flat[i], flat[j])
    assert cross_ball_exponent(ev) == cross == 1
    # one center per ball carrying charge n_k gives the same exponent
    assert multi_energy_exponent(list(counts), [[centers[0]], [centers[1]], [centers[2]]]) == cross_ball_exponent(ev)


class TestGrandCanonical:
    def test_empty_event_is_partition_function(self):
        assert gc_cylinder_gf(3, CylinderEvent.empty(3), 6) == gc_Z(3, 0, 6)

    @pytest.mark.parametrize("seed", range(6))
    def test_coefficients_match_canonical(self, seed):
        rng = random.Random(seed)
        q = rng.choice((2, 3))
        ev = random_event(rng, q)
        g = gc_cylinder_gf(q, ev, 6)
        for N in range(7):
            expected = canonical_Z(q, N) * prob_canonical(q, N, ev) / factorial(N) if N >= ev.total else 0
            assert g[N] == expected

    def test_five_adic_closed_form(self):
        ev = parse_event("5:1:1=6,5:2:2.3=4")
        assert gc_cylinder_gf(5, ev, 11) == five_adic_closed_form(11)

    def test_poisson_thinning_at_infinite_temperature(self):
        # u0 = 1: N_B is Poisson with mean t0 mu(B), independently over disjoint balls
        t0 = 2.5
        ev = CylinderEvent.of(3, [((0,), 1), ((1, 2), 2)])
        res = gc_cylinder_prob(3, ev, t0, 1)
        m1, m2 = t0 / 3, t0 / 9
        expected = math.exp(-m1) * m1 * math.exp(-m2) * m2**2 / 2
        assert abs(float(res.value) - expected) <= res.error_bound + 1e-15

    def test_exact_value_at_rational_point(self):
        ev = CylinderEvent.of(2, [((0,), 1)])
        res = gc_cylinder_prob(2, ev, Fraction(1, 2), Fraction(1, 2))
        assert isinstance(res.value, Fraction)
        assert 0 < res.value < 1 and res.error_bound <= 1e-12

    def test_limit_reached(self):
        with pytest.raises(TruncationError):
            gc_cylinder_prob(2, CylinderEvent.of(2, [((0,), 1)]), 100.0, 0.5, dmax_limit=16)
