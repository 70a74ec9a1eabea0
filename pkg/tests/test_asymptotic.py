import math
from fractions import Fraction

import pytest

from d4census.arith import primes_up_to
from d4census.asymptotic import (
    CONSTANTS,
    EulerProductSpec,
    c_base,
    c_constant,
    c_tilde,
    constant_identity,
    dyadic_hom_count,
    leading_constant,
    lemma432_sums,
    per_prime_identity_fractions,
    per_prime_identity_gap,
    predicted_count,
    tamagawa_constant,
    twist_main_term,
)
from d4census.census import BoundBox
from d4census.localsolve import ALL_DELTAS, ALL_NUS

SPEC = EulerProductSpec(pmax=10_000)


def test_spec_validation():
    with pytest.raises(ValueError):
        EulerProductSpec(pmax=2)


def test_c_prefactor_ratios_exact():
    c1 = c_constant(1, SPEC)
    c2 = c_constant(2, SPEC)
    c6 = c_constant(6, SPEC)
    assert c1.prefactor == 1
    assert c2.prefactor / c1.prefactor == Fraction(3, 4)
    assert c6.prefactor / c1.prefactor == Fraction(3, 5)  # (3/4)(4/5)
    # shared base product, so the value ratios inherit the exact prefactors
    assert c2.base == c1.base


def test_c_constant_preconditions():
    with pytest.raises(ValueError):
        c_constant(4, SPEC)
    with pytest.raises(ValueError):
        c_constant(10_007 * 3, SPEC)  # prime factor beyond pmax


def test_c_base_cauchy_property():
    small = c_base(EulerProductSpec(pmax=5_000))
    large = c_base(EulerProductSpec(pmax=10_000))
    assert abs(math.log(large.value) - math.log(small.value)) < small.tail_bound
    assert large.tail_bound < small.tail_bound


def test_c_tilde_matches_definition_split():
    ct = c_tilde(SPEC)
    recomputed = (3 / 16) ** 3 * ct.c1.value ** 3 * ct.odd_product.value
    assert ct.value == pytest.approx(recomputed, rel=1e-15)
    assert 0 < ct.value < 1


def test_c_tilde_truncation_stability():
    a = c_tilde(EulerProductSpec(pmax=100_000))
    b = c_tilde(EulerProductSpec(pmax=1_000_000))
    # successive truncations stay within the reported log-tail bound
    assert abs(a.value - b.value) <= a.value * a.tail_bound
    assert abs(a.value - b.value) < 1e-8


def test_c_tilde_partial_products_decreasing():
    values = [c_tilde(EulerProductSpec(pmax=p)).value for p in (10, 100, 1000, 10_000)]
    assert all(v > 0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))  # all factors in (0, 1)


def test_leading_constant_prefactor_split():
    lead = leading_constant(SPEC)
    bare = math.fsum(
        math.log((1 - 1 / p) ** 4 * (1 + 4 / p)) for p in map(int, primes_up_to(10_000)[1:])
    )
    assert lead.value / float(Fraction(27, 8)) == pytest.approx(math.exp(bare), rel=1e-12)


def test_leading_factors_below_one_from_five():
    for p in map(int, primes_up_to(300)):
        if p < 5:
            continue
        assert (1 - 1 / p) ** 4 * (1 + 4 / p) < 1


def test_leading_constant_cauchy_property():
    small = leading_constant(EulerProductSpec(pmax=5_000))
    large = leading_constant(EulerProductSpec(pmax=10_000))
    assert abs(math.log(large.value) - math.log(small.value)) < small.tail_bound
    assert large.tail_bound < small.tail_bound


def test_constant_identity_residual():
    report = constant_identity(SPEC)
    assert report.residual < 1e-6
    finer = constant_identity(EulerProductSpec(pmax=20_000))
    assert finer.residual <= report.residual + 1e-12


def test_per_prime_identity_exact():
    for p in map(int, primes_up_to(100)):
        if p == 2:
            continue
        lhs, rhs = per_prime_identity_fractions(p)
        assert lhs == rhs, p


def test_per_prime_identity_float_gap():
    assert per_prime_identity_gap(3) < 1e-15
    assert max(per_prime_identity_gap(int(p)) for p in primes_up_to(100)[1:]) < 1e-15


def test_class_sums_both_432():
    sums = lemma432_sums()
    assert sums.weight_at_one == 432
    assert sums.weighted == 432


def test_class_tally():
    sums = lemma432_sums()
    for delta in ALL_DELTAS:
        assert tuple(sums.tally[(delta, nu)] for nu in ALL_NUS) == CONSTANTS["class_tally"]
    assert sum(sums.tally.values()) == 3 * (48 + 32 + 32 + 32) == 432


def test_dyadic_hom_count_exact():
    assert dyadic_hom_count() == 36
    # 1 + 5*7 + 12*7 + 2*12 + 8*18 homomorphism classes over 8
    assert dyadic_hom_count() == Fraction(1 + 5 * 7 + 12 * 7 + 2 * 12 + 8 * 18, 8)


def test_tamagawa_rational_head():
    report = tamagawa_constant(SPEC)
    parts = report.parts
    assert parts.rational_prefactor() == Fraction(27, 8)
    assert parts.group_order * parts.alpha_star * parts.tau_infty * parts.tau_two == Fraction(27, 8)
    assert parts.tau_two == Fraction(9, 4)
    assert report.tau2_etale == 36


def test_tamagawa_product_matches_leading():
    report = tamagawa_constant(EulerProductSpec(pmax=100_000))
    assert report.difference < 1e-8


def test_predicted_count_scaling():
    lead = leading_constant(SPEC).value
    assert predicted_count(BoundBox(1, 1, 1, 1), SPEC) == pytest.approx(lead)
    one = predicted_count(BoundBox(3, 4, 5, 6), SPEC)
    assert predicted_count(BoundBox(3, 4, 5, 12), SPEC) == pytest.approx(2 * one)
    assert predicted_count(BoundBox(3, 0, 5, 6), SPEC) == 0


def test_twist_main_term_values():
    # 0.5 * prod_{p>2}(1 - 1/p^2) = 4 / pi^2
    assert twist_main_term(1, 100) == pytest.approx(400 / math.pi**2)
    assert twist_main_term(3, 100) == pytest.approx((3 / 4) * 400 / math.pi**2)
