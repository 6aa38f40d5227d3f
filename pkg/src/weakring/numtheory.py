"""Primality, budgeted factoring and multiplicative orders."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional

from .errors import FactorizationUnavailable, NotPrime

TRIAL_DIVISION_LIMIT = 10**6
DEFAULT_FACTOR_BUDGET = 10**8

_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class Certainty(enum.Enum):
    DETERMINISTIC = "deterministic"
    PROBABILISTIC = "probabilistic"


@lru_cache(maxsize=1)
def small_primes(limit: int = TRIAL_DIVISION_LIMIT) -> tuple:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(range(p * p, limit + 1, p)))
    return tuple(i for i, v in enumerate(sieve) if v)


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int, rounds: int = 64) -> bool:
    """Miller-Rabin: deterministic below 2**64, ``rounds`` seeded random bases above."""
    if n < 2:
        return False
    for p in _MR_BASES_64:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        return all(_mr_round(n, d, s, a) for a in _MR_BASES_64)
    rng = random.Random(n)
    return all(_mr_round(n, d, s, rng.randrange(2, n - 1)) for _ in range(rounds))


def primality_certainty(n: int) -> Certainty:
    return Certainty.DETERMINISTIC if n < 1 << 64 else Certainty.PROBABILISTIC


@dataclass
class Factorization:
    """Prime factors found so far plus an unfactored cofactor.

    ``complete`` is True when the cofactor is 1.  When the budget runs out the
    remaining composite part is kept in ``cofactor``.
    """

    n: int
    factors: dict = field(default_factory=dict)
    cofactor: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def items(self):
        return sorted(self.factors.items())

    def largest_prime(self) -> Optional[int]:
        return max(self.factors) if self.factors else None


class _Budget:
    def __init__(self, steps: int):
        self.left = steps

    def spend(self, k: int = 1) -> bool:
        self.left -= k
        return self.left >= 0


def _brent_rho(n: int, budget: _Budget, seed: int) -> Optional[int]:
    """One nontrivial factor of composite n, or None when the budget is gone."""
    if n % 2 == 0:
        return 2
    rng = random.Random(seed)
    while budget.left > 0:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = qq = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(m, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    qq = qq * abs(x - y) % n
                if not budget.spend(steps):
                    return None
                g = gcd(qq, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
    return None


def factorize(n: int, budget: int = DEFAULT_FACTOR_BUDGET,
              trial_limit: int = TRIAL_DIVISION_LIMIT) -> Factorization:
    """Trial division up to ``trial_limit`` then Pollard-Brent rho on what is left."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    result = Factorization(n)
    m = n
    for p in small_primes(trial_limit):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            result.factors[p] = e
    if m == 1:
        return result
    stack = [m]
    leftover = 1
    work = _Budget(budget)
    while stack:
        c = stack.pop()
        if c == 1:
            continue
        if is_prime(c):
            result.factors[c] = result.factors.get(c, 0) + 1
            continue
        r = isqrt(c)
        if r * r == c:
            stack.extend((r, r))
            continue
        d = _brent_rho(c, work, seed=c)
        if d is None:
            leftover *= c
            continue
        stack.extend((d, c // d))
    result.cofactor = leftover
    return result


@dataclass(frozen=True)
class PrimeModulus:
    """A prime q together with (when available) the factorization of q - 1."""

    q: int
    q_minus_1_factorization: Optional[tuple] = None
    certainty: Certainty = Certainty.DETERMINISTIC

    @classmethod
    def of(cls, q: int, factor_budget: int = DEFAULT_FACTOR_BUDGET) -> "PrimeModulus":
        return _prime_modulus(int(q), int(factor_budget))

    def __int__(self):
        return self.q

    @property
    def order_computable(self) -> bool:
        return self.q_minus_1_factorization is not None


@lru_cache(maxsize=256)
def _prime_modulus(q: int, factor_budget: int) -> PrimeModulus:
    if not is_prime(q):
        raise NotPrime(f"{q} is not prime")
    fac = factorize(q - 1, budget=factor_budget) if q > 2 else Factorization(1)
    pairs = tuple(fac.items()) if fac.complete else None
    if pairs is not None:
        prod = 1
        for p, e in pairs:
            prod *= p**e
        assert prod == q - 1
    return PrimeModulus(q, pairs, primality_certainty(q))


def as_modulus(q) -> PrimeModulus:
    return q if isinstance(q, PrimeModulus) else PrimeModulus.of(q)


def multiplicative_order(alpha: int, q) -> int:
    """Exact order of alpha in F_q^* by descending through the divisors of q - 1."""
    mod = as_modulus(q)
    p_ = mod.q
    alpha %= p_
    if alpha == 0:
        raise ValueError("0 has no multiplicative order")
    if mod.q_minus_1_factorization is None:
        raise FactorizationUnavailable(f"factorization of {p_} - 1 exceeded the budget")
    order = p_ - 1
    for prime, _ in mod.q_minus_1_factorization:
        while order % prime == 0 and pow(alpha, order // prime, p_) == 1:
            order //= prime
    return order


def is_squarefree(fac: Factorization) -> Optional[bool]:
    """Tri-state squarefreeness: None when an unfactored cofactor could hide a square."""
    if any(e > 1 for e in fac.factors.values()):
        return False
    if fac.complete:
        return True
    r = isqrt(fac.cofactor)
    if r * r == fac.cofactor:
        return False
    return None


def prime_power_base(n: int) -> Optional[int]:
    """p if n = p^k for a prime p and k >= 1, else None."""
    if n < 2:
        return None
    fac = factorize(n)
    if fac.complete and len(fac.factors) == 1:
        return next(iter(fac.factors))
    return None
