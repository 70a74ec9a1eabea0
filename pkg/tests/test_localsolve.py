from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from d4census.arith import SignedSquarefreeTriple, _is_squarefree_small, factor_small
from d4census.localsolve import (
    ALL_DELTAS,
    ALL_NUS,
    REAL_PLACE,
    TWO_PLACE,
    UNIT_RESIDUES,
    Place,
    e_set_literal_000,
    e_set_literal_010,
    find_conic_point,
    hilbert_symbol,
    in_E_set,
    padic_oracle,
    relevant_places,
    satisfies_local_conditions,
    u_weight,
)


def squarefree_values(bound):
    return [s * n for n in range(1, bound + 1) if _is_squarefree_small(n) for s in (1, -1)]


def valid_triples(bound):
    sf = [n for n in range(1, bound + 1) if _is_squarefree_small(n)]
    signed = squarefree_values(bound)
    for m1 in sf:
        for m2 in signed:
            if gcd(m1, m2) != 1:
                continue
            for m3 in signed:
                if gcd(m1, m3) != 1 or gcd(m2, m3) != 1:
                    continue
                yield SignedSquarefreeTriple(m1, m2, m3)


def test_place_validation():
    assert Place(7).p == 7
    assert REAL_PLACE.is_real and TWO_PLACE.is_two
    for bad in (9, 15, -3, 4, 1):
        with pytest.raises(ValueError):
            Place(bad)


def test_hilbert_examples():
    for a in (1, -1, 2, 15, -30):
        for v in (REAL_PLACE, TWO_PLACE, Place(3), Place(5)):
            assert hilbert_symbol(a, -a, v) == 1  # (0, 1, 1) is a solution
    assert hilbert_symbol(-1, -1, REAL_PLACE) == -1
    assert hilbert_symbol(2, 3, Place(3)) == -1
    assert hilbert_symbol(-1, -1, TWO_PLACE) == -1


def test_hilbert_strips_valuations():
    # (a, b)_p depends on valuations mod 2 only
    assert hilbert_symbol(9 * 2, 3, Place(3)) == hilbert_symbol(2, 3, Place(3))
    assert hilbert_symbol(4 * 5, 12, TWO_PLACE) == hilbert_symbol(5, 3 * 4, TWO_PLACE)


def test_oracle_examples():
    assert padic_oracle(2, 7, Place(7)) is True  # global point (3, 1, 1)
    assert padic_oracle(2, 3, Place(3)) is False
    assert padic_oracle(-1, -1, REAL_PLACE) is False
    assert padic_oracle(-1, -1, TWO_PLACE) is False


def test_oracle_rejects_high_valuation():
    with pytest.raises(ValueError):
        padic_oracle(9, 1, Place(3))
    with pytest.raises(ValueError):
        padic_oracle(3, 8, TWO_PLACE)


def test_oracle_agrees_with_symbol_up_to_30():
    values = squarefree_values(30)
    seen = {}
    for a in values:
        for b in values:
            places = [REAL_PLACE, TWO_PLACE]
            places += [Place(p) for p in factor_small(a * b) if p != 2]
            for v in places:
                key = (a, b, v.p)
                if key in seen:
                    continue
                seen[key] = True
                assert (hilbert_symbol(a, b, v) == 1) == padic_oracle(a, b, v), key


def test_hasse_product_small():
    for triple in valid_triples(15):
        a, b = triple.m1 * triple.m2, triple.m1 * triple.m3
        prod = 1
        for v in relevant_places(triple):
            prod *= hilbert_symbol(a, b, v)
        assert prod == 1, triple


def test_local_conditions_match_symbols_small():
    for triple in valid_triples(12):
        a, b = triple.m1 * triple.m2, triple.m1 * triple.m3
        all_plus = all(hilbert_symbol(a, b, v) == 1 for v in relevant_places(triple))
        assert satisfies_local_conditions(triple) == all_plus, triple


def test_in_E_set_examples():
    assert in_E_set((1, 1, 1), (0, 0, 0), (1, 1)) is True
    assert in_E_set((3, 5, 1), (0, 0, 0), (1, 1)) is False  # (7*3 pattern at 2)
    assert in_E_set((1, 1, 1), (0, 0, 0), (-1, 1)) is True


def test_in_E_set_validation():
    with pytest.raises(ValueError):
        in_E_set((2, 1, 1), (0, 0, 0))
    with pytest.raises(ValueError):
        in_E_set((1, 1, 1), (1, 1, 0))


def test_e_set_sizes():
    for nu, size in zip(ALL_NUS, (48, 32, 32, 32)):
        count = sum(
            1
            for e1 in UNIT_RESIDUES
            for e2 in UNIT_RESIDUES
            for e3 in UNIT_RESIDUES
            if in_E_set((e1, e2, e3), nu)
        )
        assert count == size, nu


def test_literal_residue_lists_match_symbol_form():
    for e1 in UNIT_RESIDUES:
        for e2 in UNIT_RESIDUES:
            for e3 in UNIT_RESIDUES:
                eps = (e1, e2, e3)
                assert e_set_literal_000(eps) == in_E_set(eps, (0, 0, 0)), eps
                assert e_set_literal_010(eps) == in_E_set(eps, (0, 1, 0)), eps


def test_local_conditions_examples():
    assert satisfies_local_conditions(SignedSquarefreeTriple(1, 2, 7)) is True
    assert satisfies_local_conditions(SignedSquarefreeTriple(1, 2, 3)) is False
    assert satisfies_local_conditions(SignedSquarefreeTriple(1, -2, -3)) is False


def test_find_conic_point_examples():
    assert find_conic_point(2, 7, 5) == (3, 1, 1)
    for b in (1, -1, 2, 3, -5, 7):
        assert find_conic_point(1, b, 1) == (1, 1, 0)
    assert find_conic_point(2, 3, 100) is None  # insoluble at 3


def test_find_conic_point_soundness():
    for a in range(-10, 11):
        for b in range(-10, 11):
            if a == 0 or b == 0:
                continue
            pt = find_conic_point(a, b, 30)
            if pt is None:
                continue
            x, y, z = pt
            assert x * x - a * y * y - b * z * z == 0
            assert gcd(gcd(x, y), z) == 1
            assert max(abs(x), abs(y), abs(z)) <= 30


def test_witness_exists_for_soluble_triples():
    for triple in valid_triples(6):
        if satisfies_local_conditions(triple):
            a, b = triple.m1 * triple.m2, triple.m1 * triple.m3
            assert find_conic_point(a, b, 200) is not None, triple


def test_u_weight_examples():
    assert u_weight(1, 1, 1, (1, 1), (0, 0, 0)) == 1
    assert u_weight(3, 1, 1, (1, 1), (0, 0, 0)) == -1  # only (-1/3) survives
    assert u_weight(3, 3, 1, (1, 1), (0, 0, 0)) == 1


def test_u_weight_rejects_even():
    with pytest.raises(ValueError):
        u_weight(2, 1, 1, (1, 1), (0, 0, 0))


def test_u_weight_mod_8_periodicity():
    for a1 in UNIT_RESIDUES:
        for a2 in UNIT_RESIDUES:
            for a3 in UNIT_RESIDUES:
                for delta in ALL_DELTAS:
                    for nu in ALL_NUS:
                        base = u_weight(a1, a2, a3, delta, nu)
                        assert u_weight(a1 + 8, a2 + 16, a3 + 24, delta, nu) == base
                        assert u_weight(a1 - 8, a2, a3, delta, nu) == base


def test_u_equals_dyadic_symbol_all_cases():
    for a1 in UNIT_RESIDUES:
        for a2 in UNIT_RESIDUES:
            for a3 in UNIT_RESIDUES:
                for delta in ALL_DELTAS:
                    for nu in ALL_NUS:
                        mu, alpha, beta = nu
                        sym = hilbert_symbol(
                            (1 << (mu + alpha)) * delta[0] * a1 * a2,
                            (1 << (mu + beta)) * delta[1] * a1 * a3,
                            TWO_PLACE,
                        )
                        assert u_weight(a1, a2, a3, delta, nu) == sym


def test_u_is_plus_one_on_E_members():
    for a1 in UNIT_RESIDUES:
        for a2 in UNIT_RESIDUES:
            for a3 in UNIT_RESIDUES:
                for delta in ALL_DELTAS:
                    for nu in ALL_NUS:
                        if in_E_set((a1, a2, a3), nu, delta):
                            assert u_weight(a1, a2, a3, delta, nu) == 1


@settings(max_examples=200)
@given(
    a=st.integers(min_value=-60, max_value=60).filter(lambda v: v != 0),
    b=st.integers(min_value=-60, max_value=60).filter(lambda v: v != 0),
)
def test_symbol_symmetric(a, b):
    for v in (REAL_PLACE, TWO_PLACE, Place(3), Place(7)):
        assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
