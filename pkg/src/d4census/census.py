"""Exact enumeration of dihedral octic pairs with bounded multi-invariants.

The count runs over signed squarefree triples (m1, m2, m3) labeling a genuine
biquadratic field whose governing conic is soluble, weighted by the number of
admissible quadratic twists:

    exact(X) = 4 * sum over admissible triples of
               tau(m1'*m2'*m3') * #{t <= X4 : t odd squarefree, coprime}

The factor 4 is the number of group isomorphisms fixing the labeled subfield
data; every octic upstairs is hit exactly that often.

Index convention (documented on the CLI as well): the box coordinate X_i
bounds the i-th invariant, so X1 bounds m2', X2 bounds m3', X3 bounds m1',
X4 bounds the twist.  enumerate_admissible_triples takes positional bounds
on (m1', m2', m3') instead; exact_census performs the mapping.  Symmetric
boxes are unaffected.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from math import gcd
from typing import Iterator, Optional

from .arith import (
    CapacityError,
    SignedSquarefreeTriple,
    SieveTables,
    build_sieve,
    decompose_triple,
    factor_small,
)
from .localsolve import ALL_DELTAS, ALL_NUS, in_E_set


@dataclass(frozen=True)
class BoundBox:
    """Bounds (X1, X2, X3, X4) on the four invariants, all >= 0."""

    x1: float
    x2: float
    x3: float
    x4: float

    def __post_init__(self):
        if min(self.x1, self.x2, self.x3, self.x4) < 0:
            raise ValueError(f"box bounds must be nonnegative: {self}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4)


@dataclass(frozen=True)
class InvariantVector:
    """The four multi-invariants of a pair (field, isomorphism)."""

    inv1: int
    inv2: int
    inv3: int
    inv4: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.inv1, self.inv2, self.inv3, self.inv4)


class InertiaClass(Enum):
    """Conjugacy class of the inertia subgroup of a tamely ramified prime."""

    S = "s"
    RS = "rs"
    R = "r"
    R2 = "r2"
    UNRAMIFIED = "unramified"


# Which inertia class pairs with which invariant coordinate.  The reflection
# classes are swapped by the outer automorphism; all counts are symmetric in
# the pair, so this is a labeling convention, kept in one place.
INERTIA_CLASS_OF_INVARIANT = {
    1: InertiaClass.S,
    2: InertiaClass.RS,
    3: InertiaClass.R,
    4: InertiaClass.R2,
}


@dataclass
class CensusReport:
    box: BoundBox
    exact: int
    predicted: float
    ratio: float
    triples_visited: int
    elapsed: float
    breakdown: Optional[list] = None


def required_sieve_limit(box: BoundBox) -> int:
    """Smallest sieve limit covering enumeration (2x odd-part bounds) and twists."""
    return max(2 * int(max(box.x1, box.x2, box.x3)), int(box.x4), 1)


def _legendre_table(p: int) -> list[int]:
    """kronecker(r, p) for r in [0, p), via Euler's criterion."""
    row = [0] * p
    for r in range(1, p):
        row[r] = 1 if pow(r, (p - 1) // 2, p) == 1 else -1
    return row


def _is_degenerate(m1: int, m2: int, m3: int) -> bool:
    # For pairwise coprime squarefree entries, a product m_i*m_j is a perfect
    # square only when it equals 1, so degeneracy is this sign pattern check.
    return (m1 == 1 and (m2 == 1 or m3 == 1)) or m2 * m3 == 1


def admissible_class_table() -> dict:
    """(eps, delta, nu) -> mod-8 admissibility, all 64 * 3 * 4 classes."""
    table = {}
    residues = (1, 3, 5, 7)
    for e1 in residues:
        for e2 in residues:
            for e3 in residues:
                for delta in ALL_DELTAS:
                    for nu in ALL_NUS:
                        table[((e1, e2, e3), delta, nu)] = in_E_set((e1, e2, e3), nu, delta)
    return table


_CLASS_TABLE: dict = {}


def _class_table() -> dict:
    if not _CLASS_TABLE:
        _CLASS_TABLE.update(admissible_class_table())
    return _CLASS_TABLE


def enumerate_admissible_triples(
    bound1: float, bound2: float, bound3: float, tables: SieveTables,
    m1p_values: Optional[list[int]] = None,
) -> Iterator[SignedSquarefreeTriple]:
    """Yield the admissible triples with odd parts m1' <= bound1, m2' <= bound2,
    m3' <= bound3.

    Admissible means: pairwise coprime squarefree with m1 > 0, the governing
    conic locally (hence globally) soluble, and non-degenerate (no product of
    two entries a perfect square, so the biquadratic field is genuine).
    m1p_values restricts the outer loop; used to partition work.
    """
    top = 2 * int(max(bound1, bound2, bound3, 0))
    if tables.limit < top:
        raise CapacityError(f"sieve limit {tables.limit} < required {top}")
    vals1 = m1p_values if m1p_values is not None else tables.odd_squarefree_upto(bound1)
    vals2 = tables.odd_squarefree_upto(bound2)
    vals3 = tables.odd_squarefree_upto(bound3)
    class_table = _class_table()
    legendre = {}
    factors = {}
    for v in set(vals1) | set(vals2) | set(vals3):
        fac = tables.prime_factors(v)
        factors[v] = fac
        for p in fac:
            if p not in legendre:
                legendre[p] = _legendre_table(p)

    for m1p in vals1:
        f1 = factors[m1p]
        e1 = m1p % 8
        for m2p in vals2:
            if gcd(m1p, m2p) != 1:
                continue
            f2 = factors[m2p]
            e2 = m2p % 8
            m12 = m1p * m2p
            for m3p in vals3:
                if gcd(m12, m3p) != 1:
                    continue
                f3 = factors[m3p]
                e3 = m3p % 8
                eps = (e1, e2, e3)
                for delta in ALL_DELTAS:
                    d2, d3 = delta
                    for nu in ALL_NUS:
                        if not class_table[(eps, delta, nu)]:
                            continue
                        mu, alpha, beta = nu
                        m1 = (1 << mu) * m1p
                        m2 = d2 * (1 << alpha) * m2p
                        m3 = d3 * (1 << beta) * m3p
                        if _is_degenerate(m1, m2, m3):
                            continue
                        neg_m2m3 = -m2 * m3
                        if any(legendre[p][neg_m2m3 % p] != 1 for p in f1):
                            continue
                        m1m3 = m1 * m3
                        if any(legendre[p][m1m3 % p] != 1 for p in f2):
                            continue
                        m1m2 = m1 * m2
                        if any(legendre[p][m1m2 % p] != 1 for p in f3):
                            continue
                        yield SignedSquarefreeTriple(m1, m2, m3)


def twist_count(m: int, bound: float, tables: SieveTables) -> int:
    """Number of octics over a fixed labeled biquadratic with twist <= bound.

    Equals tau(m) * #{t <= bound : t odd squarefree coprime to m} for the odd
    squarefree product m = m1'*m2'*m3'.
    """
    if m <= 0 or m % 2 == 0:
        raise ValueError(f"need positive odd m, got {m}")
    primes = factor_small(m)
    for p in primes:
        if m % (p * p) == 0:
            raise ValueError(f"{m} is not squarefree")
    tau = 1 << len(primes)
    return tau * tables.count_odd_squarefree_coprime(bound, primes)


def _twist_count_from_parts(
    parts_primes: tuple[int, ...], bound: float, tables: SieveTables
) -> int:
    return (1 << len(parts_primes)) * tables.count_odd_squarefree_coprime(bound, parts_primes)


def _census_partial(
    bound1: float, bound2: float, bound3: float, x4: float,
    tables: SieveTables, m1p_values: Optional[list[int]] = None,
    want_breakdown: bool = False,
):
    total = 0
    visited = 0
    rows = [] if want_breakdown else None
    for triple in enumerate_admissible_triples(bound1, bound2, bound3, tables, m1p_values):
        dec = decompose_triple(triple)
        primes = tuple(sorted(
            tables.prime_factors(dec.m1p)
            + tables.prime_factors(dec.m2p)
            + tables.prime_factors(dec.m3p)
        ))
        t = _twist_count_from_parts(primes, x4, tables)
        total += t
        visited += 1
        if rows is not None:
            rows.append((triple.m1, triple.m2, triple.m3, t))
    return total, visited, rows


def _census_worker(args):
    bound1, bound2, bound3, x4, limit, m1p_values = args
    tables = build_sieve(limit)
    return _census_partial(bound1, bound2, bound3, x4, tables, m1p_values)


def exact_census(
    box: BoundBox, tables: SieveTables, workers: int = 1,
    pmax: int = 100_000, want_breakdown: bool = False,
) -> CensusReport:
    """Exact count of pairs with invariants in the box, plus the predicted
    main term and their ratio.

    Deterministic and independent of the worker count: work is partitioned by
    disjoint ranges of m1' and the partial sums are added as exact integers.
    """
    start = time.perf_counter()
    bound1, bound2, bound3 = box.x3, box.x1, box.x2  # positional odd-part bounds
    if tables.limit < required_sieve_limit(box):
        raise CapacityError(
            f"sieve limit {tables.limit} < required {required_sieve_limit(box)}"
        )
    if workers <= 1 or want_breakdown:
        total, visited, rows = _census_partial(
            bound1, bound2, bound3, box.x4, tables, want_breakdown=want_breakdown
        )
    else:
        vals1 = tables.odd_squarefree_upto(bound1)
        chunks = [vals1[i::workers] for i in range(workers)]
        jobs = [
            (bound1, bound2, bound3, box.x4, tables.limit, chunk)
            for chunk in chunks if chunk
        ]
        total, visited, rows = 0, 0, None
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part_total, part_visited, _ in pool.map(_census_worker, jobs):
                total += part_total
                visited += part_visited
    exact = 4 * total
    from .asymptotic import EulerProductSpec, predicted_count

    predicted = predicted_count(box, EulerProductSpec(pmax=pmax))
    ratio = exact / predicted if predicted else float("nan")
    breakdown = None
    if want_breakdown and rows is not None:
        breakdown = []
        cumulative = 0
        for m1, m2, m3, t in rows:
            cumulative += t
            breakdown.append((m1, m2, m3, t, cumulative))
    return CensusReport(
        box=box, exact=exact, predicted=predicted, ratio=ratio,
        triples_visited=visited, elapsed=time.perf_counter() - start,
        breakdown=breakdown,
    )


def invariants_of(triple: SignedSquarefreeTriple, t: int) -> InvariantVector:
    """Invariant vector (m2', m3', m1', t) of the octic labeled by triple and
    twist t."""
    dec = decompose_triple(triple)
    if t <= 0 or t % 2 == 0:
        raise ValueError(f"twist must be a positive odd integer, got {t}")
    t_primes = factor_small(t)
    for p in t_primes:
        if t % (p * p) == 0:
            raise ValueError(f"twist {t} is not squarefree")
        if (dec.m1p * dec.m2p * dec.m3p) % p == 0:
            raise ValueError(f"twist {t} shares the factor {p} with the triple")
    return InvariantVector(inv1=dec.m2p, inv2=dec.m3p, inv3=dec.m1p, inv4=t)


def inertia_class(p: int, triple: SignedSquarefreeTriple, t: int) -> InertiaClass:
    """Inertia class of the odd prime p in the octic labeled by (triple, t).

    p = 2 is rejected: when 2 ramifies it does so wildly and carries no class
    here.
    """
    if p == 2:
        raise ValueError("2 ramifies wildly; no tame inertia class")
    if p < 3 or factor_small(p) != (p,):
        raise ValueError(f"{p} is not an odd prime")
    dec = decompose_triple(triple)
    invariants_of(triple, t)  # validates t
    if dec.m1p % p == 0:
        return INERTIA_CLASS_OF_INVARIANT[3]
    if dec.m2p % p == 0:
        return INERTIA_CLASS_OF_INVARIANT[1]
    if dec.m3p % p == 0:
        return INERTIA_CLASS_OF_INVARIANT[2]
    if t % p == 0:
        return INERTIA_CLASS_OF_INVARIANT[4]
    return InertiaClass.UNRAMIFIED


# Splitting types of a tamely ramified prime in the octic and its subfields,
# one block of rows per inertia class.  Row order: (M, K1, K2, L, K).
SPLITTING_TABLE = {
    InertiaClass.S: (
        ("1^2 1^2 1^2 1^2", "1 1", "1^2", "1^2 1^2", "1^2"),
        ("2^2 2^2", "1 1", "1^2", "1^2 1^2", "1^2"),
    ),
    InertiaClass.RS: (
        ("1^2 1^2 1^2 1^2", "1^2", "1 1", "1^2 1^2", "1^2"),
        ("2^2 2^2", "1^2", "1 1", "1^2 1^2", "1^2"),
    ),
    InertiaClass.R: (
        ("1^4 1^4", "1^2", "1^2", "1^2 1^2", "1 1"),
        ("2^4", "1^2", "1^2", "2^2", "2"),
    ),
    InertiaClass.R2: (
        ("1^2 1^2 1^2 1^2", "1 1", "1 1", "1 1 1 1", "1 1"),
        ("2^2 2^2", "1 1", "2", "2 2", "2"),
        ("2^2 2^2", "2", "1 1", "2 2", "2"),
        ("2^2 2^2", "2", "2", "2 2", "1 1"),
    ),
}


def splitting_rows(c: InertiaClass):
    """Static splitting-type rows (M, K1, K2, L, K) for a ramified class."""
    if c is InertiaClass.UNRAMIFIED:
        raise ValueError("splitting rows are defined for ramified classes only")
    return SPLITTING_TABLE[c]
