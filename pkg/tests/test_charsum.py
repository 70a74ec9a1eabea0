import random
from fractions import Fraction
from math import gcd, log, sqrt

import pytest

from d4census.arith import factor_small, kronecker
from d4census.census import BoundBox, exact_census
from d4census.charsum import (
    CharacterSpec,
    ClassKey,
    L_divisor_sum,
    L_product,
    T111_direct,
    T_direct,
    all_class_keys,
    bilinear_sum,
    census_from_classes,
    character_sum_f,
)
from d4census.localsolve import ALL_DELTAS, ALL_NUS


def test_class_key_validation():
    ClassKey((1, 3, 5), (1, -1), (0, 0, 1))
    with pytest.raises(ValueError):
        ClassKey((2, 1, 1), (1, 1), (0, 0, 0))
    with pytest.raises(ValueError):
        ClassKey((1, 1, 1), (-1, -1), (0, 0, 0))
    with pytest.raises(ValueError):
        ClassKey((1, 1, 1), (1, 1), (1, 1, 0))


def test_L_product_examples():
    for delta in ALL_DELTAS:
        for nu in ALL_NUS:
            assert L_product((1, 1, 1), delta, nu) == 1  # empty product
    assert L_product((1, 1, 3), (1, 1), (0, 0, 0)) == 2  # 1 + (1/3)
    assert L_product((7, 1, 1), (1, 1), (0, 0, 0)) == 0  # 1 + (-1/7)


def test_L_divisor_sum_examples():
    assert L_divisor_sum((1, 1, 3), (1, 1), (0, 0, 0)) == 2
    assert L_divisor_sum((1, 1, 1), (1, 1), (0, 0, 0)) == 1
    assert L_divisor_sum((7, 1, 1), (1, 1), (0, 0, 0)) == 0


def test_L_rejects_bad_parts():
    with pytest.raises(ValueError):
        L_product((2, 1, 1), (1, 1), (0, 0, 0))
    with pytest.raises(ValueError):
        L_product((9, 1, 1), (1, 1), (0, 0, 0))
    with pytest.raises(ValueError):
        L_product((3, 3, 1), (1, 1), (0, 0, 0))


def _coprime_odd_triples(tables, bound):
    odd_sf = tables.odd_squarefree_upto(bound)
    for m1 in odd_sf:
        for m2 in odd_sf:
            if m1 * m2 > bound or gcd(m1, m2) != 1:
                continue
            for m3 in odd_sf:
                if m1 * m2 * m3 > bound or gcd(m1 * m2, m3) != 1:
                    continue
                yield (m1, m2, m3)


def test_L_identity_small_range(tables_census):
    for mp in _coprime_odd_triples(tables_census, 315):
        tau = int(tables_census.tau[mp[0] * mp[1] * mp[2]])
        for delta in ALL_DELTAS:
            for nu in ALL_NUS:
                lp = L_product(mp, delta, nu)
                assert lp == L_divisor_sum(mp, delta, nu), (mp, delta, nu)
                assert lp in (0, tau)


def test_L_positive_iff_odd_conditions_hold(tables_census):
    for mp in _coprime_odd_triples(tables_census, 105):
        for delta in ALL_DELTAS:
            for nu in ALL_NUS:
                d2, d3 = delta
                mu, alpha, beta = nu
                m1 = (1 << mu) * mp[0]
                m2 = d2 * (1 << alpha) * mp[1]
                m3 = d3 * (1 << beta) * mp[2]
                conds = all(kronecker(-m2 * m3, p) == 1 for p in factor_small(mp[0]))
                conds = conds and all(kronecker(m1 * m3, p) == 1 for p in factor_small(mp[1]))
                conds = conds and all(kronecker(m1 * m2, p) == 1 for p in factor_small(mp[2]))
                assert (L_product(mp, delta, nu) > 0) == conds


# --- character sums -----------------------------------------------------------


def test_character_spec_validation():
    with pytest.raises(ValueError):
        CharacterSpec.quadratic(-6)   # 2 mod 4
    with pytest.raises(ValueError):
        CharacterSpec.quadratic(0)
    with pytest.raises(ValueError):
        CharacterSpec(q=3, kind="kronecker", disc=5)  # radical mismatch
    with pytest.raises(ValueError):
        CharacterSpec(q=3, kind="principal", m=6)     # gcd(m, q) > 1
    with pytest.raises(ValueError):
        CharacterSpec(q=3, kind="weird")


def test_character_vanishing_set():
    spec = CharacterSpec.quadratic(-40)  # q = 40
    for n in range(1, 60):
        assert (spec.chi(n) == 0) == (gcd(n, 40) > 1)


def test_character_completely_multiplicative():
    for spec in (CharacterSpec.quadratic(-3), CharacterSpec.quadratic(40),
                 CharacterSpec.principal(12)):
        for a in range(1, 40):
            for b in range(1, 40):
                assert spec.chi(a * b) == spec.chi(a) * spec.chi(b)


def test_character_sum_small_principal(tables_census):
    rep = character_sum_f(10, CharacterSpec.principal(1), tables_census)
    expected = (
        Fraction(1) + Fraction(2, 3) + Fraction(3, 4) + Fraction(5, 6)
        + Fraction(1, 2) + Fraction(7, 8) + Fraction(5, 9)
    )
    assert rep.value == expected
    assert rep.terms == 7  # n in {1, 2, 3, 5, 6, 7, 10}


def test_character_sum_quadratic_example(tables_census):
    # chi = (./3) as a symbol with discriminant -3: 1 - 2/3 - 5/6
    rep = character_sum_f(5, CharacterSpec.quadratic(-3), tables_census)
    assert rep.value == Fraction(-1, 2)
    assert rep.main_term == 0.0


def test_character_sum_empty_range(tables_census):
    assert character_sum_f(0.5, CharacterSpec.principal(1), tables_census).value == 0


def test_character_sum_residue_class(tables_census):
    rep = character_sum_f(
        40, CharacterSpec.principal(1), tables_census, residue=(3, 8)
    )
    expected = sum(
        (tables_census.f(n) for n in (3, 11, 19, 35)), Fraction(0)
    )  # squarefree n = 3 mod 8 up to 40: 3, 11, 19, 35
    assert rep.value == expected
    # main term c(8) x / phi(8): the modulus folds into c and the class
    # contributes the 1/phi(8) density
    full = character_sum_f(40, CharacterSpec.principal(1), tables_census)
    assert rep.main_term == pytest.approx(full.main_term * (3 / 4) / 4)


def test_character_sum_validation(tables_census):
    with pytest.raises(ValueError):
        character_sum_f(10, CharacterSpec.principal(1), tables_census, residue=(2, 8))
    with pytest.raises(ValueError):
        character_sum_f(10**7, CharacterSpec.principal(1), tables_census)


def test_character_sum_main_term_tracks(tables_100k):
    rep = character_sum_f(50_000, CharacterSpec.principal(6), tables_100k)
    assert abs(float(rep.value) - rep.main_term) < 100 * sqrt(50_000) * log(50_000)
    assert rep.deviation < 100


def test_character_sum_nonprincipal_cancellation(tables_100k):
    rep = character_sum_f(50_000, CharacterSpec.quadratic(-43), tables_100k)
    assert abs(float(rep.value)) < 100 * sqrt(43 * 50_000) * log(43) * log(50_000)


@pytest.mark.slow
def test_character_sum_deviation_bounded_at_1e6():
    from d4census.arith import build_sieve

    tables = build_sieve(1_000_000)
    for spec in (
        CharacterSpec.principal(1),
        CharacterSpec.principal(15),
        CharacterSpec.quadratic(-43),
        CharacterSpec.quadratic(40),
    ):
        rep = character_sum_f(1_000_000, spec, tables)
        assert rep.deviation < 100


# --- class sums ----------------------------------------------------------------


def test_T_direct_unit_box(tables_census):
    box = BoundBox(1, 1, 1, 1)
    contributions = {}
    for key in all_class_keys():
        if not key.admissible:
            continue
        v = T_direct(key, box, tables_census)
        if v:
            contributions[(key.eps, key.delta, key.nu)] = v
    assert sum(contributions.values()) == 4  # four classes contribute 1 each
    assert all(v == 1 for v in contributions.values())
    assert census_from_classes(box, tables_census) == 16


def test_T_direct_vanishes_on_inadmissible_classes(tables_census):
    # reciprocity: odd-prime conditions plus the sign condition force the
    # dyadic symbol, so classes outside the mod-8 sets carry no triples
    box = BoundBox(10, 10, 10, 10)
    for key in all_class_keys():
        if not key.admissible:
            assert T_direct(key, box, tables_census) == 0


def test_T_direct_empty_twist_range(tables_census):
    box = BoundBox(1, 1, 1, 0.5)
    for key in list(all_class_keys())[:24]:
        assert T_direct(key, box, tables_census) == 0


def test_census_consistency_small_boxes(tables_census):
    for raw in [(1, 1, 1, 1), (6, 6, 6, 6), (10, 10, 10, 10), (7, 3, 5, 9)]:
        box = BoundBox(*raw)
        exact = exact_census(box, tables_census, pmax=1000).exact
        assert census_from_classes(box, tables_census) == exact, raw


def test_T111_examples(tables_census):
    key = ClassKey((1, 1, 1), (1, 1), (0, 0, 0))
    assert T111_direct(1, 1, 1, key, tables_census) == 1
    key3 = ClassKey((3, 1, 1), (1, 1), (0, 0, 0))
    assert T111_direct(3, 1, 1, key3, tables_census) == Fraction(3, 4)


def test_class_main_terms_recover_leading_constant():
    from d4census.asymptotic import EulerProductSpec, leading_constant
    from d4census.charsum import T_main_term

    spec = EulerProductSpec(pmax=100_000)
    box = BoundBox(1, 1, 1, 1)
    total = sum(4 * T_main_term(k, box, spec) for k in all_class_keys() if k.admissible)
    assert total == pytest.approx(leading_constant(spec).value, rel=1e-4)


def test_class_sums_csv_shape(tables_census):
    from d4census.charsum import CLASS_CSV_HEADER, class_sums_csv

    text = class_sums_csv(BoundBox(1, 1, 1, 1), tables_census)
    lines = text.strip().split("\n")
    assert lines[0] == CLASS_CSV_HEADER
    assert len(lines) == 433  # header + one row per admissible class
    values = [int(line.split(",")[12]) for line in lines[1:]]
    assert sum(values) * 4 == 16


def test_T111_convergence_band(tables_3000):
    from d4census.asymptotic import EulerProductSpec, c_tilde

    key = ClassKey((1, 1, 1), (1, 1), (0, 0, 0))
    value = float(T111_direct(500, 500, 500, key, tables_3000))
    ct = c_tilde(EulerProductSpec(pmax=100_000))
    ratio = value / (ct.value * 500**3)
    assert 0 < ratio < 2


# --- bilinear sums --------------------------------------------------------------


def test_bilinear_trivial():
    rep = bilinear_sum(1, 1, lambda m: 1, lambda n: 1)
    assert rep.value == 1
    assert rep.ratio > 0


def test_bilinear_single_column():
    alpha = lambda m: 1
    beta = lambda n: 1 if n == 1 else 0
    rep = bilinear_sum(9, 9, alpha, beta)
    assert rep.value == 5  # (m/1) = 1 for the five odd m <= 9


def test_bilinear_random_signs_soft_bound():
    rng = random.Random(20240817)
    signs_a = {m: rng.choice((-1, 1)) for m in range(1, 513, 2)}
    signs_b = {n: rng.choice((-1, 1)) for n in range(1, 513, 2)}
    rep = bilinear_sum(512, 512, signs_a.get, signs_b.get)
    assert rep.ratio < 10
