import json
import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from weakring.errors import FactorizationUnavailable, NotPrime
from weakring.numtheory import (Certainty, PrimeModulus, factorize, is_prime, is_squarefree,
                                multiplicative_order, prime_power_base)
from weakring.poly import (IntPolynomial, QuotientRing, pm_divmod, pm_gcd, pm_mul, pm_rem,
                           qpoly_xgcd, trinomial)

small_polys = st.lists(st.integers(-50, 50), min_size=1, max_size=12)


def schoolbook(u, v, q):
    out = [0] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        for j, b in enumerate(v):
            out[i + j] = (out[i + j] + a * b) % q
    while out and out[-1] == 0:
        out.pop()
    return out


def test_int_polynomial_canonical_form():
    f = IntPolynomial((1, 2, 0, 0))
    assert f.coeffs == (1, 2)
    assert f.degree == 1
    assert IntPolynomial((3, 0, 1)).is_monic
    assert not f.is_monic
    assert IntPolynomial(()).is_zero


def test_json_round_trip_and_strictness():
    f = trinomial(1024, 2**31 + 14, 2**31)
    doc = json.loads(json.dumps(f.to_json()))
    assert all(isinstance(c, str) for c in doc["coeffs"])
    assert IntPolynomial.from_json(doc) == f
    with pytest.raises(ValueError):
        IntPolynomial.from_json({"coeffs": [1, 2], "var": "x"})


@given(small_polys, small_polys)
def test_integer_multiplication_matches_sympy(u, v):
    x = sympy.Symbol("x")
    prod = sympy.Poly(u[::-1], x) * sympy.Poly(v[::-1], x)
    expect = IntPolynomial(tuple(int(c) for c in prod.all_coeffs()[::-1]))
    assert IntPolynomial(tuple(u)) * IntPolynomial(tuple(v)) == expect


@given(st.lists(st.integers(0, 2**40), min_size=1, max_size=80),
       st.lists(st.integers(0, 2**40), min_size=1, max_size=80),
       st.sampled_from([2, 3, 4093, 2**31 - 1, 1099514773507]))
def test_kronecker_multiplication_matches_schoolbook(u, v, q):
    u = [c % q for c in u]
    v = [c % q for c in v]
    assert pm_mul(u, v, q) == schoolbook(u, v, q)


@given(st.integers(2, 40), st.data())
def test_barrett_reduction_matches_long_division(n, data):
    q = data.draw(st.sampled_from([3, 257, 4093, 2**31 - 1]))
    f = [data.draw(st.integers(0, q - 1)) for _ in range(n)] + [1]
    u = data.draw(st.lists(st.integers(0, q - 1), max_size=2 * n - 1))
    ring = QuotientRing(f, q)
    assert ring.reduce(list(u)) == pm_rem(list(u), f, q)


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=8),
       st.lists(st.integers(-20, 20), min_size=2, max_size=8))
def test_rational_xgcd_bezout_identity(u, v):
    if not any(u[1:]) or not any(v[1:]):
        return
    g, s, t = qpoly_xgcd(u, v)
    from weakring.poly import _q_mul, _q_sub
    lhs = _q_sub(_q_mul(s, u), [-c for c in _q_mul(t, v)])
    assert lhs == g
    assert g[-1] == 1


@given(st.integers(1, 10**6))
def test_is_prime_matches_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


@pytest.mark.parametrize("n", [2**61 - 1, 2**64 + 13, 2**89 - 1, (2**64 + 13) * (2**61 - 1),
                               1099514773507, 6487031809, 4294967311])
def test_is_prime_large_values(n):
    assert is_prime(n) == sympy.isprime(n)


@given(st.integers(1, 10**14))
def test_factorize_matches_sympy(n):
    fac = factorize(n)
    assert fac.complete
    assert dict(fac.factors) == {int(p): e for p, e in sympy.factorint(n).items()}


def test_factorize_budget_gives_tri_state():
    n = (2**61 - 1) * (2**89 - 1)
    fac = factorize(n * 6, budget=10)
    assert fac.factors.get(2) == 1 and fac.factors.get(3) == 1
    assert fac.cofactor == n or fac.complete
    assert is_squarefree(fac) in (None, True)
    assert is_squarefree(factorize(n * 12, budget=10)) is False


def test_prime_modulus_records_factorization():
    m = PrimeModulus.of(4093)
    prod = 1
    for p, e in m.q_minus_1_factorization:
        prod *= p**e
    assert prod == 4092
    assert m.certainty is Certainty.DETERMINISTIC
    with pytest.raises(NotPrime):
        PrimeModulus.of(4095)


@pytest.mark.parametrize("alpha,q,order", [(1, 257, 1), (256, 257, 2), (2, 257, 16),
                                           (2, 17, 8), (3, 7, 6)])
def test_multiplicative_order_examples(alpha, q, order):
    assert multiplicative_order(alpha, q) == order


@given(st.sampled_from([101, 257, 1009, 4093]), st.data())
def test_multiplicative_order_matches_brute_force(q, data):
    a = data.draw(st.integers(1, q - 1))
    k, x = 1, a
    while x != 1:
        x = x * a % q
        k += 1
    assert multiplicative_order(a, q) == k


def test_order_unavailable_when_q_minus_1_unfactored():
    q = PrimeModulus.of(2**89 - 1, factor_budget=1)
    if q.order_computable:
        pytest.skip("q - 1 factored by trial division alone")
    with pytest.raises(FactorizationUnavailable):
        multiplicative_order(3, q)


def test_prime_power_base():
    assert prime_power_base(1024) == 2
    assert prime_power_base(3**5) == 3
    assert prime_power_base(192) is None


def test_gcd_and_division_mod_q():
    q = 17
    u = pm_mul([1, 1], [2, 1], q)
    q_, r = pm_divmod(u, [1, 1], q)
    assert r == [] and q_ == [2, 1]
    assert pm_gcd(u, [1, 1], q) == [1, 1]
    rng = random.Random(0)
    for _ in range(20):
        a = [rng.randrange(q) for _ in range(5)] + [1]
        b = [rng.randrange(q) for _ in range(3)] + [1]
        quo, rem = pm_divmod(a, b, q)
        back = pm_mul(quo, b, q)
        full = [(x + y) % q for x, y in zip(back + [0] * 8, rem + [0] * 12)]
        while full and full[-1] == 0:
            full.pop()
        assert full == a
