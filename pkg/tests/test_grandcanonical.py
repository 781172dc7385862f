import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultrametric_gas.canonical import canonical_Z
from ultrametric_gas.exactnum import rf_eval
from ultrametric_gas.grandcanonical import (
    TruncationError,
    exp_tail_bound,
    gc_potential,
    gc_Z,
    occupancy_pmf,
    verify_functional_equation,
    verify_gc_scaling,
    verify_gcz,
    verify_thm4,
)

u_points = st.fractions(min_value=0, max_value=1, max_denominator=9)


@pytest.mark.parametrize("q,dmax", [(2, 8), (3, 7), (5, 6)])
def test_identities_over_rational_functions(q, dmax):
    assert verify_gcz(q, dmax)
    assert verify_functional_equation(q, dmax)
    assert all(verify_thm4(q, ell, dmax) for ell in (0, 1, 2))
    assert all(verify_gc_scaling(q, ell, dmax) for ell in (1, 2))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 4, 7]), u_points, st.integers(min_value=0, max_value=3))
def test_identities_at_fixed_u(q, u0, ell):
    assert verify_gcz(q, 9, u0)
    assert verify_functional_equation(q, 9, u0)
    assert verify_thm4(q, ell, 9, u0)


def test_coefficients():
    z = gc_Z(3, 1, 5)
    for n in range(6):
        assert z[n] == canonical_Z(3, n) * z.u ** (n * (n - 1) // 2) / (3**n * math.factorial(n))


def test_identity_fails_for_wrong_power():
    assert gc_Z(3, 0, 6) != gc_Z(3, 1, 6) ** 2


def test_rejects_negative_ell():
    with pytest.raises(ValueError):
        gc_Z(2, -1, 4)


class TestOccupancy:
    @pytest.mark.parametrize("t0", [0.5, 2.0, 6.0])
    def test_poisson_at_infinite_temperature(self, t0):
        pmf = occupancy_pmf(3, t0, 1, 60)
        for N, p in enumerate(pmf.probabilities[:20]):
            assert p == pytest.approx(math.exp(-t0) * t0**N / math.factorial(N), rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_binomial_at_zero_temperature(self, q):
        t0 = Fraction(3, 2)
        pmf = occupancy_pmf(q, t0, Fraction(0), 40)
        s = t0 / q
        p = s / (1 + s)
        for N in range(q + 1):
            assert pmf.probabilities[N] == pytest.approx(float(math.comb(q, N) * p**N * (1 - p) ** (q - N)), rel=1e-12)
        assert all(x == 0 for x in pmf.probabilities[q + 1 :])

    def test_exact_weights_at_rational_point(self):
        pmf = occupancy_pmf(5, Fraction(1), Fraction(1, 5), 30)
        assert pmf.weights[2] == rf_eval(canonical_Z(5, 2), Fraction(1, 5)) / 2

    def test_truncation_error(self):
        with pytest.raises(TruncationError) as info:
            occupancy_pmf(2, 10.0, 0.5, 10)
        assert info.value.required > 10
        occupancy_pmf(2, 10.0, 0.5, info.value.required)

    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            occupancy_pmf(2, 1.0, 1.5, 30)


@pytest.mark.parametrize("t0,nmax", [(1.0, 5), (3.0, 10), (0.2, 2)])
def test_tail_bound_dominates_true_tail(t0, nmax):
    tail = math.exp(t0) - sum(t0**n / math.factorial(n) for n in range(nmax + 1))
    assert tail <= exp_tail_bound(t0, nmax) <= 2 * tail


def test_potential_limit():
    # at u -> 1 the occupancy is Poisson and Z(t) = e^t
    assert gc_potential(2, 1.5, 1e-12) == pytest.approx(-1.5 / 1e-12, rel=1e-6)


def test_potential_at_zero_temperature_limit():
    # u -> 0: Z(t) -> (1 + t/q)**q
    assert gc_potential(3, 2.0, 60.0) == pytest.approx(-3 * math.log(1 + 2 / 3) / 60.0, rel=1e-9)


def test_float_table_guard():
    from ultrametric_gas.canonical import canonical_table

    with pytest.raises(ValueError, match="overflows"):
        canonical_table(2, 0.5)[200]
