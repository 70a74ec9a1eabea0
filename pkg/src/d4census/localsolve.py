"""Local solubility of the conic x^2 - a*y^2 - b*z^2 = 0 at every place of Q.

The census needs to decide, for a = m1*m2 and b = m1*m3, whether the conic
has a rational point.  By the Hasse principle that reduces to local checks:

  * hilbert_symbol: closed-form (a, b)_v at the real place, at 2, and at odd
    primes (valuations stripped mod 2, epsilon(p) = (p-1)/2 exponent formula).
  * padic_oracle: an independent ground truth that searches exhaustively for
    primitive solutions modulo p^3 (odd p) resp. 2^6 -- Hensel-sufficient for
    coefficients of valuation <= 1.
  * in_E_set: the mod-8 residue criterion at 2, stated operationally through
    the 2-adic Hilbert symbol.  Transcribed residue lists survive only as a
    cross-check (E_000_LITERAL / E_010_LITERAL below).
  * satisfies_local_conditions: the full bundle (odd-prime Legendre
    conditions, real-place sign condition, the mod-8 set).
  * u_weight: the +-1 weight collecting quadratic-reciprocity signs in the
    character-sum expansion; it coincides with a 2-adic Hilbert symbol.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

from .arith import (
    SignedSquarefreeTriple,
    decompose_triple,
    factor_small,
    kronecker,
)


@dataclass(frozen=True)
class Place:
    """A place of Q: p = 0 is the real place, p = 2 dyadic, else an odd prime."""

    p: int

    def __post_init__(self):
        if self.p in (0, 2):
            return
        if self.p < 3 or self.p % 2 == 0 or factor_small(self.p) != (self.p,):
            raise ValueError(f"not a valid place parameter: {self.p}")

    @property
    def is_real(self) -> bool:
        return self.p == 0

    @property
    def is_two(self) -> bool:
        return self.p == 2

    def __repr__(self):
        return "RealPlace" if self.p == 0 else f"Place({self.p})"


REAL_PLACE = Place(0)
TWO_PLACE = Place(2)


def odd_place(p: int) -> Place:
    return Place(p)


def _eta(u: int) -> int:
    """Parity of (u - 1)/2 for odd u: 0 if u = 1 mod 4, 1 if u = 3 mod 4."""
    return (u % 4) // 2


def _omega(u: int) -> int:
    """Parity of (u^2 - 1)/8 for odd u: 1 exactly when u = 3, 5 mod 8."""
    return 1 if u % 8 in (3, 5) else 0


def _strip(n: int, p: int) -> tuple[int, int]:
    """(valuation mod 2, unit part) of n at p."""
    v = 0
    while n % p == 0:
        n //= p
        v ^= 1
    return v, n


def hilbert_symbol(a: int, b: int, v: Place) -> int:
    """(a, b)_v in {-1, +1}: +1 iff x^2 - a*y^2 - b*z^2 = 0 has a nonzero
    solution over the completion of Q at v."""
    if a == 0 or b == 0:
        raise ValueError("hilbert_symbol needs nonzero arguments")
    if v.is_real:
        return -1 if (a < 0 and b < 0) else 1
    if v.is_two:
        s, u = _strip(a, 2)
        t, w = _strip(b, 2)
        exponent = _eta(u) * _eta(w) + s * _omega(w) + t * _omega(u)
        return -1 if exponent % 2 else 1
    p = v.p
    s, u = _strip(a, p)
    t, w = _strip(b, p)
    eps = ((p - 1) // 2) % 2
    sign = (-1) ** (s * t * eps)
    if t:
        sign *= kronecker(u, p)
    if s:
        sign *= kronecker(w, p)
    return sign


@lru_cache(maxsize=64)
def _squares_mask(modulus: int) -> np.ndarray:
    mask = np.zeros(modulus, dtype=bool)
    x = np.arange(modulus, dtype=np.int64)
    mask[(x * x) % modulus] = True
    return mask


def padic_oracle(a: int, b: int, v: Place) -> bool:
    """Ground truth for hilbert_symbol by finite search, no symbol formulas.

    Real place: sign check.  At an odd p (resp. at 2) a primitive solution of
    x^2 - a*y^2 - b*z^2 = 0 modulo p^3 (resp. 2^6) lifts to the completion by
    Hensel's lemma once the coefficient valuations are at most 1, and any
    p-adic solution scales to such a residue.  A primitive solution has a unit
    coordinate, so dividing by it leaves one coordinate equal to 1; the search
    below runs those three one-coordinate-pinned cases exhaustively.
    """
    if a == 0 or b == 0:
        raise ValueError("padic_oracle needs nonzero arguments")
    if v.is_real:
        return not (a < 0 and b < 0)
    p = 2 if v.is_two else v.p
    for coeff in (a, b):
        val = 0
        n = abs(coeff)
        while n % p == 0:
            n //= p
            val += 1
        if val > 1:
            raise ValueError(f"padic_oracle: valuation of {coeff} at {p} exceeds 1")
    modulus = 64 if p == 2 else p**3
    sq = _squares_mask(modulus)
    t = np.arange(modulus, dtype=np.int64)
    t2 = (t * t) % modulus
    am, bm = a % modulus, b % modulus
    # x = 1: need a*y^2 + b*z^2 = 1, i.e. (1 - a*y^2) in {b*z^2}
    bz2 = np.zeros(modulus, dtype=bool)
    bz2[(bm * t2) % modulus] = True
    if bz2[(1 - am * t2) % modulus].any():
        return True
    # y = 1: need x^2 - b*z^2 = a
    if sq[(am + bm * t2) % modulus].any():
        return True
    # z = 1: need x^2 - a*y^2 = b
    if sq[(bm + am * t2) % modulus].any():
        return True
    return False


def in_E_set(eps: tuple[int, int, int], nu: tuple[int, int, int],
             delta: tuple[int, int] = (1, 1)) -> bool:
    """Mod-8 admissibility at 2 of the class (eps, delta, nu).

    True iff (2^(mu+alpha) * d2 * e1*e2, 2^(mu+beta) * d3 * e1*e3)_2 = +1,
    evaluated on integer representatives.  This Hilbert-symbol form is the
    normative definition; the transcribed residue lists are cross-checks only.
    """
    e1, e2, e3 = eps
    mu, alpha, beta = nu
    d2, d3 = delta
    if any(e % 2 == 0 for e in eps):
        raise ValueError(f"residues must be odd: {eps}")
    if mu + alpha + beta > 1 or any(x not in (0, 1) for x in nu):
        raise ValueError(f"invalid 2-exponents: {nu}")
    a = (1 << (mu + alpha)) * d2 * (e1 % 8) * (e2 % 8)
    b = (1 << (mu + beta)) * d3 * (e1 % 8) * (e3 % 8)
    return hilbert_symbol(a, b, TWO_PLACE) == 1


def _cong4(x: int, y: int) -> bool:
    return (x - y) % 4 == 0


def e_set_literal_000(eps: tuple[int, int, int]) -> bool:
    """Transcribed residue list for the unramified-at-2 block: e1 = e_j mod 4
    for j = 2 or 3."""
    e1, e2, e3 = (e % 8 for e in eps)
    return _cong4(e1, e2) or _cong4(e1, e3)


def e_set_literal_010(eps: tuple[int, int, int]) -> bool:
    """Transcribed residue list for the (mu, alpha, beta) = (0, 1, 0) block."""
    e1, e2, e3 = (e % 8 for e in eps)
    if e1 == e3:
        return True
    if _cong4(e1, -e3) and e1 != (-e3) % 8 and _cong4(e1, -e2):
        return True
    if _cong4(e1, e2) and e1 == (-e3) % 8:
        return True
    return False


def satisfies_local_conditions(triple: SignedSquarefreeTriple) -> bool:
    """Global solubility of x^2 - m1*m2*y^2 - m1*m3*z^2 = 0, by local tests.

    Conjunction of the odd-prime Legendre conditions, the real-place sign
    condition, and the mod-8 class condition at 2.
    """
    dec = decompose_triple(triple)
    m1, m2, m3 = triple.as_tuple()
    if m2 < 0 and m3 < 0:
        return False
    for p in factor_small(dec.m1p):
        if kronecker(-m2 * m3, p) != 1:
            return False
    for p in factor_small(dec.m2p):
        if kronecker(m1 * m3, p) != 1:
            return False
    for p in factor_small(dec.m3p):
        if kronecker(m1 * m2, p) != 1:
            return False
    return in_E_set(dec.eps, dec.nu, dec.delta)


def relevant_places(triple: SignedSquarefreeTriple) -> list[Place]:
    """Real, 2, and the odd primes dividing m1*m2*m3; symbols elsewhere are +1."""
    places = [REAL_PLACE, TWO_PLACE]
    m1, m2, m3 = triple.as_tuple()
    for p in factor_small(m1 * m2 * m3):
        if p != 2:
            places.append(Place(p))
    return places


def find_conic_point(a: int, b: int, height: int):
    """Search for a primitive (x, y, z) with x^2 - a*y^2 - b*z^2 = 0.

    Signs never matter, so the search runs over 0 <= x, y, z <= height,
    increasing z, then y, then x, and returns the first primitive hit (the
    minimum under that ordering).  None means no point of height <= height
    exists -- not insolubility.
    """
    if a == 0 or b == 0:
        raise ValueError("need nonzero coefficients")
    if height < 1:
        raise ValueError("height bound must be >= 1")
    squares = {x * x: x for x in range(height + 1)}
    for z in range(height + 1):
        bz2 = b * z * z
        for y in range(height + 1):
            if y == 0 and z == 0:
                continue
            target = a * y * y + bz2
            if 0 <= target <= height * height:
                x = squares.get(target)
                if x is not None and gcd(gcd(x, y), z) == 1:
                    return (x, y, z)
    return None


def u_weight(a1: int, a2: int, a3: int, delta: tuple[int, int],
             nu: tuple[int, int, int]) -> int:
    """The +-1 weight u(a1, a2, a3) of the character-sum expansion.

    (-1)^(eta(a1)eta(a2) + eta(a1)eta(a3) + eta(a2)eta(a3))
      * (-1/a1) * (2^mu / a2*a3) * (d2*2^alpha / a1*a3) * (d3*2^beta / a1*a2)

    with Kronecker symbols throughout; depends only on the a_i mod 8.
    For delta != (-1, -1) this equals
    (2^(mu+alpha)*d2*a1*a2, 2^(mu+beta)*d3*a1*a3)_2.
    """
    if a1 % 2 == 0 or a2 % 2 == 0 or a3 % 2 == 0:
        raise ValueError("u_weight needs odd arguments")
    mu, alpha, beta = nu
    d2, d3 = delta
    sign = (-1) ** (_eta(a1) * _eta(a2) + _eta(a1) * _eta(a3) + _eta(a2) * _eta(a3))
    sign *= kronecker(-1, a1)
    sign *= kronecker(1 << mu, a2 * a3)
    sign *= kronecker(d2 * (1 << alpha), a1 * a3)
    sign *= kronecker(d3 * (1 << beta), a1 * a2)
    return sign


ALL_DELTAS = ((1, 1), (1, -1), (-1, 1))
ALL_NUS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
UNIT_RESIDUES = (1, 3, 5, 7)
