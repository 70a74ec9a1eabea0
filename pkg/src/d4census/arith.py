"""Multiplicative-function tables, the Kronecker symbol, and triple decomposition.

Everything downstream (local solubility, the exact census, the character sums)
runs on three primitives collected here:

  * SieveTables: smallest prime factor, mu, tau and the exact rational weight
    f(n) = prod_{p|n} (1 + 1/p)^(-1) on [1, N], built once and then read-only.
  * kronecker(a, n): the full Kronecker symbol for arbitrary integer pairs.
  * decompose_triple: the sign / 2-part / odd-part splitting
    m1 = 2^mu * m1', m2 = d2 * 2^a * m2', m3 = d3 * 2^b * m3'
    of a signed squarefree triple, which drives all residue-class logic.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

SIEVE_CACHE_MAGIC = b"D4CS"
SIEVE_CACHE_VERSION = 1

# Default ceiling on sieve memory: the five tables cost ~29 bytes per entry.
DEFAULT_MEMORY_BUDGET = 2 * 1024**3
_BYTES_PER_ENTRY = 29


class CapacityError(Exception):
    """A requested table exceeds the configured memory budget."""


class InvalidTripleError(ValueError):
    """A triple violates squarefreeness, coprimality, or the sign convention."""


@dataclass
class SieveTables:
    """Multiplicative data on [1, N], immutable once built.

    spf[n] is the least prime divisor of n (spf[1] = 1), mu is the Moebius
    function, tau the divisor count, and f_num[n]/f_den[n] the reduced
    rational f(n) = prod_{p|n} p/(p+1).  odd_sf_count[n] counts odd squarefree
    integers <= n; it backs the exact coprime twist counting.
    """

    limit: int
    spf: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    f_num: np.ndarray
    f_den: np.ndarray
    odd_sf_count: np.ndarray
    _coprime_cache: dict = field(default_factory=dict, repr=False)

    def is_squarefree(self, n: int) -> bool:
        return self.mu[n] != 0

    def f(self, n: int) -> Fraction:
        """f(n) = prod_{p | n} (1 + 1/p)^(-1) as an exact fraction."""
        return Fraction(int(self.f_num[n]), int(self.f_den[n]))

    def prime_factors(self, n: int) -> tuple[int, ...]:
        """Distinct prime divisors of 1 <= n <= limit, increasing."""
        if not 1 <= n <= self.limit:
            raise ValueError(f"{n} outside sieve range [1, {self.limit}]")
        out = []
        while n > 1:
            p = int(self.spf[n])
            out.append(p)
            while n % p == 0:
                n //= p
        return tuple(out)

    def odd_squarefree_upto(self, bound: float) -> list[int]:
        """All odd squarefree integers <= bound, increasing."""
        top = min(int(bound), self.limit)
        return [n for n in range(1, top + 1, 2) if self.mu[n] != 0]

    def count_odd_squarefree_coprime(self, bound: float, primes: tuple[int, ...]) -> int:
        """#{t <= bound : t odd, squarefree, p ∤ t for every p in primes}.

        Uses A(Y, P) = A(Y, P \\ {p}) - A(Y // p, P): split on whether the
        largest excluded prime divides t.  Exact; memoized per table.
        """
        y = int(bound)
        if y <= 0:
            return 0
        if y > self.limit:
            raise CapacityError(f"twist bound {bound} exceeds sieve limit {self.limit}")
        odd = tuple(p for p in primes if p != 2)
        return self._count_coprime(y, odd)

    def _count_coprime(self, y: int, primes: tuple[int, ...]) -> int:
        if y <= 0:
            return 0
        if not primes:
            return int(self.odd_sf_count[y])
        key = (y, primes)
        cached = self._coprime_cache.get(key)
        if cached is None:
            cached = self._count_coprime(y, primes[:-1]) - self._count_coprime(y // primes[-1], primes)
            self._coprime_cache[key] = cached
        return cached


def build_sieve(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTables:
    """Sieve spf, mu, tau and the reduced f(n) pairs on [1, limit].

    One smallest-prime-factor pass seeds everything; mu/tau/f follow by the
    recurrence over n // spf[n], so the tables stay mutually consistent.
    """
    if limit < 1:
        raise ValueError("sieve limit must be >= 1")
    if limit * _BYTES_PER_ENTRY > memory_budget:
        raise CapacityError(
            f"sieve of size {limit} needs ~{limit * _BYTES_PER_ENTRY} bytes, "
            f"budget is {memory_budget}"
        )
    spf = _spf_sieve(limit)
    return _tables_from_spf(limit, spf)


def _spf_sieve(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 1:
        spf[1] = 1
    for p in range(2, isqrt(limit) + 1):
        if spf[p] == 0:
            spf[p] = p
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest  # remaining entries are primes > sqrt(limit); index 0 stays 0
    return spf


def _tables_from_spf(limit: int, spf: np.ndarray) -> SieveTables:
    n_range = np.arange(limit + 1, dtype=np.int64)
    mu = np.zeros(limit + 1, dtype=np.int8)
    tau = np.zeros(limit + 1, dtype=np.int64)
    f_num = np.zeros(limit + 1, dtype=np.int64)
    f_den = np.zeros(limit + 1, dtype=np.int64)
    # exponent of spf[n] in n, to extend tau beyond squarefree arguments
    exp_spf = np.zeros(limit + 1, dtype=np.int8)
    if limit >= 1:
        mu[1] = 1
        tau[1] = 1
        f_num[1] = 1
        f_den[1] = 1
    for n in range(2, limit + 1):
        p = spf[n]
        m = n // p
        if m % p == 0:
            mu[n] = 0
            exp_spf[n] = exp_spf[m] + 1
            tau[n] = tau[m] // (exp_spf[m] + 1) * (exp_spf[m] + 2)
            f_num[n] = f_num[m]
            f_den[n] = f_den[m]
        else:
            mu[n] = -mu[m]
            exp_spf[n] = 1
            tau[n] = 2 * tau[m]
            f_num[n] = f_num[m] * p
            f_den[n] = f_den[m] * (p + 1)
    g = np.gcd(f_num, f_den)
    g[0] = 1
    f_num //= g
    f_den //= g
    odd_sf = (mu != 0) & (n_range % 2 == 1)
    odd_sf_count = np.cumsum(odd_sf, dtype=np.int64)
    return SieveTables(
        limit=limit, spf=spf, mu=mu, tau=tau,
        f_num=f_num, f_den=f_den, odd_sf_count=odd_sf_count,
    )


def save_sieve_cache(tables: SieveTables, path) -> None:
    """Write the spf table; mu/tau/f are rederived on load."""
    with open(path, "wb") as fh:
        fh.write(SIEVE_CACHE_MAGIC)
        fh.write(struct.pack("<I", SIEVE_CACHE_VERSION))
        fh.write(struct.pack("<Q", tables.limit))
        fh.write(tables.spf[1:].astype("<u4").tobytes())


def load_sieve_cache(path) -> SieveTables:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SIEVE_CACHE_MAGIC:
            raise ValueError(f"bad sieve cache magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != SIEVE_CACHE_VERSION:
            raise ValueError(f"unsupported sieve cache version {version}")
        (limit,) = struct.unpack("<Q", fh.read(8))
        raw = fh.read(4 * limit)
        if len(raw) != 4 * limit:
            raise ValueError("truncated sieve cache")
        spf = np.zeros(limit + 1, dtype=np.int64)
        spf[1:] = np.frombuffer(raw, dtype="<u4").astype(np.int64)
    return _tables_from_spf(limit, spf)


def primes_up_to(n: int) -> np.ndarray:
    """Primes <= n via a plain boolean sieve (used for Euler products)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a / n), defined for all integer pairs.

    Conventions: (a/0) = 1 iff a = +-1 else 0; (a/-1) = -1 iff a < 0;
    (a/2) = 0, 1, -1 for a even, a = +-1 mod 8, a = +-3 mod 8.  Completely
    multiplicative in both arguments; equals the Jacobi symbol for odd n > 0.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        # (a/2) per a mod 8, applied once per factor of 2 in n
        twos = 0
        while n % 2 == 0:
            n //= 2
            twos += 1
        if twos % 2 == 1 and a % 8 in (3, 5):
            sign = -sign
    # Jacobi-style reciprocity loop for odd n >= 1
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


@dataclass(frozen=True)
class SignedSquarefreeTriple:
    """Pairwise coprime squarefree (m1, m2, m3) with m1 > 0.

    Labels the biquadratic field generated by sqrt(m1*m2) and sqrt(m1*m3);
    at most one entry is even.
    """

    m1: int
    m2: int
    m3: int

    def validate(self) -> "SignedSquarefreeTriple":
        if self.m1 <= 0 or self.m2 == 0 or self.m3 == 0:
            raise InvalidTripleError(f"{self}: need m1 > 0 and m2, m3 nonzero")
        vals = (self.m1, self.m2, self.m3)
        for v in vals:
            if not _is_squarefree_small(abs(v)):
                raise InvalidTripleError(f"{self}: {v} is not squarefree")
        for i in range(3):
            for j in range(i + 1, 3):
                if gcd(vals[i], vals[j]) != 1:
                    raise InvalidTripleError(f"{self}: entries {i+1},{j+1} share a factor")
        return self

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.m1, self.m2, self.m3)


@dataclass(frozen=True)
class DecomposedTriple:
    """Sign / 2-part / odd-part data of a SignedSquarefreeTriple.

    m1 = 2^mu * m1p, m2 = delta2 * 2^alpha * m2p, m3 = delta3 * 2^beta * m3p
    with m1p, m2p, m3p positive odd; eps_i = m_ip mod 8.  Pairwise coprimality
    forces mu + alpha + beta <= 1.
    """

    m1p: int
    m2p: int
    m3p: int
    delta2: int
    delta3: int
    mu: int
    alpha: int
    beta: int
    eps1: int
    eps2: int
    eps3: int

    @property
    def nu(self) -> tuple[int, int, int]:
        return (self.mu, self.alpha, self.beta)

    @property
    def eps(self) -> tuple[int, int, int]:
        return (self.eps1, self.eps2, self.eps3)

    @property
    def delta(self) -> tuple[int, int]:
        return (self.delta2, self.delta3)

    def reconstruct(self) -> SignedSquarefreeTriple:
        return SignedSquarefreeTriple(
            (1 << self.mu) * self.m1p,
            self.delta2 * (1 << self.alpha) * self.m2p,
            self.delta3 * (1 << self.beta) * self.m3p,
        )


def decompose_triple(triple: SignedSquarefreeTriple) -> DecomposedTriple:
    """Split a validated triple into signs, 2-exponents and odd parts."""
    triple.validate()
    mu, m1p = _split_two(triple.m1)
    alpha, m2p = _split_two(abs(triple.m2))
    beta, m3p = _split_two(abs(triple.m3))
    return DecomposedTriple(
        m1p=m1p, m2p=m2p, m3p=m3p,
        delta2=1 if triple.m2 > 0 else -1,
        delta3=1 if triple.m3 > 0 else -1,
        mu=mu, alpha=alpha, beta=beta,
        eps1=m1p % 8, eps2=m2p % 8, eps3=m3p % 8,
    )


def _split_two(n: int) -> tuple[int, int]:
    if n % 2 == 0:
        return 1, n // 2
    return 0, n


def _is_squarefree_small(n: int) -> bool:
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        while n % d == 0:
            n //= d
        d += 1 if d == 2 else 2
    return True


def factor_small(n: int) -> tuple[int, ...]:
    """Distinct prime divisors of |n| by trial division, increasing."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)
