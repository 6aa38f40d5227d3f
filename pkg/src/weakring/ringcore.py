"""Roots, orders, splitting and irreducibility of integer polynomials mod q."""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

from .errors import (FactorizationUnavailable, ModulusTooLargeForOrderComputation,
                     PrecisionInsufficient)
from .numtheory import (PrimeModulus, as_modulus, factorize,
                        multiplicative_order, small_primes)
from .poly import (IntPolynomial, QuotientRing, pm_derivative, pm_divmod, pm_eval,
                   pm_gcd, pm_monic, pm_sub, trim)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootInfo:
    """A root of f in F_q with its multiplicative order (None when unknown)."""

    root: int
    order: Optional[int]
    q: int

    @property
    def is_one(self) -> bool:
        return self.root == 1

    @property
    def is_minus_one(self) -> bool:
        return self.q > 2 and self.root == self.q - 1

    def verify(self, f: IntPolynomial) -> bool:
        if poly_eval_mod(f, self.root, self.q) != 0:
            return False
        if self.order is None:
            return True
        if pow(self.root, self.order, self.q) != 1:
            return False
        fac = factorize(self.order)
        return all(pow(self.root, self.order // p, self.q) != 1 for p in fac.factors)


def poly_eval_mod(f: IntPolynomial, alpha: int, q) -> int:
    """f(alpha) mod q by Horner, reducing at every step."""
    q = int(q)
    acc = 0
    for c in reversed(f.coeffs):
        acc = (acc * alpha + c) % q
    return acc


def _root_info(r: int, mod: PrimeModulus) -> RootInfo:
    if r == 0:
        return RootInfo(0, None, mod.q)
    try:
        order = multiplicative_order(r, mod)
    except FactorizationUnavailable:
        order = None
    return RootInfo(r, order, mod.q)


def _split_linear(g: list, q: int, rng: random.Random) -> list:
    """Roots of a monic squarefree g that is a product of distinct linear factors."""
    roots = []
    stack = [g]
    while stack:
        h = stack.pop()
        d = len(h) - 1
        if d <= 0:
            continue
        if d == 1:
            roots.append((-h[0]) * pow(h[1], -1, q) % q)
            continue
        if h[0] == 0:
            roots.append(0)
            stack.append(trim(h[1:]))
            continue
        if q == 2:
            roots.extend(r for r in (0, 1) if pm_eval(h, r, q) == 0)
            continue
        ring = QuotientRing(h, q)
        e = (q - 1) // 2
        while True:
            delta = rng.randrange(q)
            t = ring.pow([delta, 1], e)
            t = pm_sub(t, [1], q)
            c = pm_gcd(h, t, q)
            if 0 < len(c) - 1 < d:
                other, rem = pm_divmod(h, c, q)
                assert not rem
                stack.append(c)
                stack.append(pm_monic(other, q))
                break
    return roots


def find_roots_mod(f: IntPolynomial, q, seed: int = 0,
                   require_orders: bool = False) -> list:
    """All distinct roots of f in F_q with their multiplicative orders.

    Candidates 1, q-1 and 2 are tested first; the full set comes from
    gcd(f, x^q - x) followed by seeded equal-degree splitting.  When q - 1
    cannot be factored in budget the orders are None, unless
    ``require_orders`` is set, in which case ModulusTooLargeForOrderComputation
    is raised.
    """
    mod = as_modulus(q)
    p = mod.q
    fp = f.mod(p)
    if not fp:
        raise ValueError("f vanishes identically mod q")
    if require_orders and not mod.order_computable:
        raise ModulusTooLargeForOrderComputation(f"cannot factor {p} - 1 within budget")
    fp = pm_monic(fp, p)
    quick = {c % p for c in (1, p - 1, 2) if pm_eval(fp, c % p, p) == 0}
    if len(fp) - 1 == 0:
        return []
    ring = QuotientRing(fp, p)
    xq = ring.pow_x(p)
    g = pm_gcd(fp, pm_sub(xq, [0, 1], p), p)
    roots = set(_split_linear(g, p, random.Random(seed)))
    assert quick <= roots
    return [_root_info(r, mod) for r in sorted(roots)]


def small_order_roots(f: IntPolynomial, q, max_order: int = 16, seed: int = 0) -> list:
    """Roots of f mod q whose multiplicative order is at most ``max_order``.

    Orders r with r | q - 1 are handled one at a time via gcd(f mod (x^r - 1), Phi_r),
    which only ever touches polynomials of degree < r.
    """
    mod = as_modulus(q)
    p = mod.q
    found = []
    rng = random.Random(seed)
    for r in range(1, max_order + 1):
        if (p - 1) % r:
            continue
        folded = [0] * r
        for i, c in enumerate(f.coeffs):
            folded[i % r] += c
        folded = trim([c % p for c in folded])
        phi = cyclotomic_poly(r).mod(p)
        g = pm_gcd(phi, folded, p) if folded else pm_monic(phi, p)
        if len(g) <= 1:
            continue
        for root in _split_linear(g, p, rng):
            found.append(RootInfo(root, r, p))
    return sorted(found, key=lambda ri: (ri.order, ri.root))


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> IntPolynomial:
    """Phi_m by exact division of x^m - 1 by Phi_d over the proper divisors d of m."""
    if m < 1:
        raise ValueError("m must be positive")
    num = IntPolynomial.from_terms({m: 1, 0: -1})
    for d in range(1, m):
        if m % d == 0:
            num, rem = num.divmod_monic(cyclotomic_poly(d))
            assert rem.is_zero
    return num


def euler_phi(m: int) -> int:
    return cyclotomic_poly(m).degree


class SplitVerdict(enum.Enum):
    SPLITS = "splits"
    DOES_NOT_SPLIT = "does_not_split"
    SPLITS_BY_EASYSPLIT = "splits_by_easysplit"


def _is_two_power_binomial(f: IntPolynomial) -> bool:
    n = f.degree
    return (n >= 1 and n & (n - 1) == 0 and f.coeffs[0] == 1 and f.leading == 1
            and len(f.nonzero_terms()) == 2)


def splits_completely(f: IntPolynomial, q) -> SplitVerdict:
    """Whether monic f splits into distinct linear factors mod q.

    For x^(2^(k-1)) + 1 the sufficient test f(2) = 0 mod q is tried first.
    """
    p = int(q)
    if _is_two_power_binomial(f) and poly_eval_mod(f, 2, p) == 0:
        return SplitVerdict.SPLITS_BY_EASYSPLIT
    fp = pm_monic(f.mod(p), p)
    if len(fp) - 1 < 1:
        raise ValueError("f must be nonconstant mod q")
    ring = QuotientRing(fp, p)
    if ring.pow_x(p) != ring.reduce([0, 1]):
        return SplitVerdict.DOES_NOT_SPLIT
    if len(pm_gcd(fp, pm_derivative(fp, p), p)) != 1:
        return SplitVerdict.DOES_NOT_SPLIT
    return SplitVerdict.SPLITS


class IrreducibilityVerdict(enum.Enum):
    IRREDUCIBLE_CERTIFIED = "irreducible_certified"
    EISENSTEIN_CERTIFIED = "eisenstein_certified"
    UNKNOWN = "unknown"


def eisenstein_prime(f: IntPolynomial, trial_limit: int = 10**6) -> Optional[int]:
    """Smallest Eisenstein prime for monic f among small factors of the constant term."""
    c0 = f.coeffs[0] if f.coeffs else 0
    if c0 == 0:
        return None
    from math import gcd
    g = 0
    for c in f.coeffs[:-1]:
        g = gcd(g, c)
    fac = factorize(abs(g), budget=10**5, trial_limit=trial_limit) if abs(g) > 1 else None
    if fac is None:
        return None
    for p in sorted(fac.factors):
        if c0 % (p * p):
            return p
    return None


def _rabin_irreducible_mod(fp: list, p: int) -> bool:
    """Rabin's test for monic squarefree fp in F_p[x]."""
    n = len(fp) - 1
    ring = QuotientRing(fp, p)
    x = ring.reduce([0, 1])
    checkpoints = {n // r for r in factorize(n).factors}
    if n >= 3:
        # factors of degree 1 or 2 are common, so look for them first
        checkpoints |= {1, 2}
    cur = ring.pow_x(p)
    for k in range(1, n + 1):
        if k in checkpoints and k < n:
            if len(pm_gcd(fp, pm_sub(cur, x, p), p)) > 1:
                return False
        if k == n:
            return cur == x
        cur = ring.pow(cur, p)
    return False


def is_probably_irreducible(f: IntPolynomial, max_primes: int = 8) -> IrreducibilityVerdict:
    """Certify irreducibility over Q, or say UNKNOWN; never claims reducibility.

    Eisenstein at a small prime of the constant term first, then irreducibility
    modulo up to ``max_primes`` small primes at which f stays squarefree.
    """
    if not f.is_monic or f.degree < 1:
        raise ValueError("f must be monic of degree >= 1")
    if f.degree == 1:
        return IrreducibilityVerdict.IRREDUCIBLE_CERTIFIED
    if eisenstein_prime(f) is not None:
        return IrreducibilityVerdict.EISENSTEIN_CERTIFIED
    tried = 0
    for p in small_primes()[:64]:
        if tried >= max_primes:
            break
        fp = f.mod(p)
        if len(pm_gcd(fp, pm_derivative(fp, p), p)) != 1:
            continue
        tried += 1
        if _rabin_irreducible_mod(fp, p):
            return IrreducibilityVerdict.IRREDUCIBLE_CERTIFIED
    return IrreducibilityVerdict.UNKNOWN


# --------------------------------------------------------------------------
# discriminants


class Discriminant(NamedTuple):
    value: object          # int for exact modes, gmpy2.mpfr for numeric
    rel_error_bound: float  # 0.0 for exact modes


def _bareiss_det(rows: list) -> int:
    a = [list(r) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[-1][-1]


def resultant(f: IntPolynomial, g: IntPolynomial) -> int:
    """Exact resultant via the Sylvester determinant (fraction-free Bareiss)."""
    m, n = f.degree, g.degree
    fc, gc = f.coeffs[::-1], g.coeffs[::-1]
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(fc) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(gc) + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant_abs(f: IntPolynomial, mode: str = "numeric",
                     precision_bits: int = 300) -> Discriminant:
    """|disc f| for monic f.

    ``exact_family`` needs f = x^n + c and returns n^n |c|^(n-1); ``exact`` uses
    the Sylvester resultant of f and f'; ``numeric`` multiplies squared root
    differences at ``precision_bits`` and reports a relative error bound.
    """
    n = f.degree
    if mode == "exact_family":
        terms = f.nonzero_terms()
        if not f.is_monic or set(terms) - {0, n}:
            raise ValueError("exact_family mode needs f = x^n + c")
        c = terms.get(0, 0)
        return Discriminant(n**n * abs(c) ** (n - 1), 0.0)
    if mode == "exact":
        return Discriminant(abs(resultant(f, f.derivative())) // abs(f.leading), 0.0)
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")
    import gmpy2
    from .embedding import complex_roots
    rs = complex_roots(f, precision_bits)
    with gmpy2.context(precision=precision_bits + 32):
        prod = gmpy2.mpfr(1)
        rel = 0.0
        roots = rs.roots
        errs = rs.errors
        for i in range(n):
            for j in range(i + 1, n):
                d = abs(roots[i] - roots[j])
                prod *= d * d
                rel += 2.0 * float((errs[i] + errs[j]) / d)
        rel += n * n * 2.0 ** (-precision_bits)
    if rel > 2.0 ** -32:
        raise PrecisionInsufficient(f"discriminant relative error bound {rel:.3g} exceeds 2^-32")
    return Discriminant(prod, rel)
