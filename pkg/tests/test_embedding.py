import random

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from weakring.embedding import (EmbeddingData, build_embedding, complex_roots, decimal_string,
                                family_rho_prime, load_embedding, ring_multiply,
                                save_embedding, spectral_norm, spectral_stats,
                                transport_to_residue, tau)
from weakring.errors import PrecisionInsufficient, RoundingAmbiguous
from weakring.poly import IntPolynomial, trinomial
from weakring.ringcore import discriminant_abs

X2P2 = IntPolynomial((2, 0, 1))


def family(n, q):
    return IntPolynomial.from_terms({n: 1, 0: q - 1})


def rel(a, b):
    return abs(mpfr(a) - mpfr(b)) / abs(mpfr(b))


def mat_float(A):
    return np.array([[float(x) for x in row] for row in A])


# roots

def test_roots_of_x2_plus_2():
    rs = complex_roots(X2P2)
    assert (rs.r1, rs.r2) == (0, 1)
    with gmpy2.context(precision=300):
        s2 = gmpy2.sqrt(mpfr(2))
        assert sorted(float(z.imag) for z in rs.roots) == pytest.approx([-float(s2), float(s2)])
        for z in rs.roots:
            assert abs(z.real) < mpfr(2) ** -150
            assert abs(abs(z.imag) - s2) < mpfr(2) ** -150


def test_roots_of_x3_plus_2():
    rs = complex_roots(IntPolynomial((2, 0, 0, 1)))
    assert (rs.r1, rs.r2) == (1, 1)
    assert rs.row_key[0] == "real"
    assert float(rs.roots[0].real) == pytest.approx(-2 ** (1 / 3))


@pytest.mark.parametrize("n,q", [(4, 5), (6, 17), (8, 257)])
def test_family_roots_lie_on_a_circle(n, q):
    rs = complex_roots(family(n, q))
    a = (q - 1) ** (1 / n)
    args = sorted(round(float(gmpy2.atan2(z.imag, z.real)) / (np.pi / n)) % (2 * n) for z in rs.roots)
    assert args == list(range(1, 2 * n, 2))
    for z in rs.roots:
        assert float(abs(z)) == pytest.approx(a, rel=1e-14)


def test_repeated_root_is_refused():
    with pytest.raises(PrecisionInsufficient):
        complex_roots(IntPolynomial((1, -2, 1)))


# matrix, determinant

def test_embedding_of_x2_plus_2():
    emb = build_embedding(X2P2)
    M = mat_float(emb.M)
    assert np.allclose(np.abs(M), [[1, 0], [0, 2 ** 0.5]], atol=1e-15)
    assert rel(emb.det_abs, gmpy2.sqrt(mpfr(2))) < 1e-60
    assert rel(emb.det_abs, mpfr(0.5) * gmpy2.sqrt(mpfr(8))) < 1e-60
    st_ = spectral_stats(emb)
    assert rel(st_.rho, 1) < 1e-10
    assert rel(st_.rho_prime, mpfr(2) ** 0.25) < 1e-10


def test_row_order_real_then_re_then_im():
    emb = build_embedding(IntPolynomial((1, 1, 0, 0, 0, 1)))  # x^5 + x + 1
    n = emb.n
    assert n == emb.r1 + 2 * emb.r2
    assert emb.row_key == ("real",) * emb.r1 + ("complex_re",) * emb.r2 + ("complex_im",) * emb.r2
    col1 = emb.M[:, 1]
    for i in range(emb.r2):
        z = emb.roots[emb.r1 + i]
        assert abs(col1[emb.r1 + i] - z.real) < mpfr(2) ** -200
        assert abs(col1[emb.r1 + emb.r2 + i] - z.imag) < mpfr(2) ** -200


def test_inverse_round_trip_n192():
    emb = build_embedding(family(192, 4093))
    with emb.context():
        E = emb.M.dot(emb.M_inv)
        err = max(abs(E[i, j] - (1 if i == j else 0)) for i in range(0, 192, 7) for j in range(192))
    assert err < mpfr(2) ** -150


@settings(max_examples=10)
@given(st.integers(2, 24), st.integers(-30, 30), st.integers(1, 30), st.booleans())
def test_det_relation_against_exact_resultant(n, a, b, neg):
    f = trinomial(n, a, -b if neg else b)
    try:
        disc = discriminant_abs(f, "exact").value
    except Exception:
        return
    if disc == 0:
        return
    emb = build_embedding(f)
    with emb.context():
        expect = mpfr(2) ** (-emb.r2) * gmpy2.sqrt(mpfr(disc))
        assert rel(emb.det_abs, expect) < 1e-8


@pytest.mark.parametrize("n,q", [(4, 5), (8, 17), (16, 257)])
def test_family_columns_are_orthogonal(n, q):
    emb = build_embedding(family(n, q))
    with emb.context():
        M = emb.M
        norms = [gmpy2.sqrt(sum(x * x for x in M[:, i])) for i in range(n)]
        tol = mpfr(2) ** -(emb.precision_bits // 2)
        for i in range(n):
            for j in range(i + 1, n):
                dot = sum(M[k, i] * M[k, j] for k in range(n))
                assert abs(dot) < tol * norms[i] * norms[j]


# spectral quantities

def test_scaled_identity():
    emb = build_embedding(IntPolynomial((1, 0, 1)))   # x^2 + 1 embeds as the identity
    assert np.allclose(mat_float(emb.M), np.eye(2))
    for c in (3, 0.25, 7.5):
        rep = spectral_stats(emb.scaled(c))
        assert rel(rep.rho, mpfr(1) / mpfr(c)) < 1e-10
        assert rel(rep.rho_prime, 1) < 1e-10
        assert rel(rep.condition_number, 1) < 1e-10


@settings(max_examples=25)
@given(st.integers(2, 9), st.integers(0, 2**32))
def test_spectral_norm_matches_svd(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    with gmpy2.context(precision=200):
        Am = np.array([[mpfr(float(x)) for x in row] for row in A], dtype=object)
    s, _ = spectral_norm(Am, 200)
    assert float(s) == pytest.approx(np.linalg.svd(A, compute_uv=False)[0], rel=1e-8)


def test_rho_prime_bounded_by_twice_condition_number_and_scale_invariant():
    rng = random.Random(11)
    done = 0
    while done < 12:
        a, b = rng.randint(-60, 60), rng.randint(-60, 60)
        if b == 0:
            continue
        f = trinomial(32, a, b)
        try:
            emb = build_embedding(f)
        except PrecisionInsufficient:
            continue
        rep = spectral_stats(emb)
        assert rep.condition_number >= 1
        assert rep.rho_prime <= 2 * rep.condition_number
        rep7 = spectral_stats(emb.scaled(7))
        assert rel(rep7.rho_prime, rep.rho_prime) < 1e-10
        done += 1


def test_family_closed_form_examples():
    assert float(family_rho_prime(2, 3)) == pytest.approx(2 ** -0.25, rel=1e-15)
    assert float(family_rho_prime(3, 3)) == pytest.approx(1.0, rel=1e-15)
    numeric = spectral_stats(build_embedding(family(2, 3))).rho_prime
    assert float(numeric) == pytest.approx(2 ** 0.25, rel=1e-10)
    assert float(numeric / family_rho_prime(2, 3)) == pytest.approx(2 ** 0.5, rel=1e-10)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_convention_constant_independent_of_q(n):
    ratios = [spectral_stats(build_embedding(family(n, q))).rho_prime / family_rho_prime(n, q)
              for q in (3, 5, 17, 257)]
    assert max(ratios) - min(ratios) < 1e-6 * max(ratios)


@pytest.mark.parametrize("n,q,w,expect", [(192, 4093, "8.87", 0.0136),
                                          (1024, 2**31 - 1, "3.192", 5.0654),
                                          (512, 12289, "12.18", 0.0063)])
def test_tau_examples(n, q, w, expect):
    assert abs(float(tau(n, q, w)) - expect) < 1e-4


def test_spectral_bound_flag():
    emb = build_embedding(family(4, 257))
    rep = spectral_stats(emb, w=0.5, q=257)
    assert rep.spectral_bound_met == bool(rep.rho_prime < mpfr(257) / (4 * 0.5 * 4))
    assert rep.tau is not None
    doc = rep.to_json()
    assert all(isinstance(doc[k], str) for k in ("rho", "rho_prime", "condition_number"))


def test_decimal_string_has_thirty_digits():
    s = decimal_string(gmpy2.const_pi(precision=300))
    assert s == "3.14159265358979323846264338328"
    assert len(s.replace(".", "")) == 30


# transport

TRANSPORT_CASES = [(IntPolynomial.from_terms({4: 1, 0: 256}), 257, 1),
                   (IntPolynomial((3, 1, 0, 1)), 5, 1),           # x^3 + x + 3, f(1) = 5
                   (IntPolynomial.from_terms({4: 1, 0: 1}), 17, 2)]


def test_transport_of_unit_is_one():
    for f, q, alpha in TRANSPORT_CASES:
        emb = build_embedding(f)
        one = emb.embed([1] + [0] * (emb.n - 1))
        assert transport_to_residue(one, emb, alpha, q) == 1


@pytest.mark.parametrize("case", range(len(TRANSPORT_CASES)))
def test_transport_is_a_ring_homomorphism(case):
    f, q, alpha = TRANSPORT_CASES[case]
    emb = build_embedding(f)
    rng = random.Random(case)
    n = emb.n
    for _ in range(1000 // len(TRANSPORT_CASES)):
        cu = [rng.randrange(-q, q) for _ in range(n)]
        cv = [rng.randrange(-q, q) for _ in range(n)]
        u, v = emb.embed(cu), emb.embed(cv)
        tu = transport_to_residue(u, emb, alpha, q)
        tv = transport_to_residue(v, emb, alpha, q)
        assert transport_to_residue(ring_multiply(u, v, emb, q), emb, alpha, q) == tu * tv % q
        with emb.context():
            assert transport_to_residue(u + v, emb, alpha, q) == (tu + tv) % q


def test_transport_refuses_half_integer_coordinates():
    emb = build_embedding(X2P2)
    with emb.context():
        v = emb.M.dot(np.array([mpfr(0.5), mpfr(0)], dtype=object))
    with pytest.raises(RoundingAmbiguous):
        transport_to_residue(v, emb, 1, 3)


# cache

def test_cache_round_trip(tmp_path):
    f = trinomial(12, 5, -7)
    emb = build_embedding(f)
    save_embedding(emb, tmp_path)
    back = load_embedding(f, emb.precision_bits, tmp_path)
    assert isinstance(back, EmbeddingData)
    assert back.row_key == emb.row_key and (back.r1, back.r2) == (emb.r1, emb.r2)
    assert back.det_abs == emb.det_abs
    assert all(x == y for x, y in zip(back.M.flat, emb.M.flat))
    assert all(x == y for x, y in zip(back.M_inv.flat, emb.M_inv.flat))
    assert load_embedding(f, 200, tmp_path) is None
    via_build = build_embedding(f, emb.precision_bits, cache_dir=tmp_path)
    assert via_build.det_abs == emb.det_abs


def test_cache_ignores_corrupt_blob(tmp_path):
    f = trinomial(6, 1, 1)
    path = save_embedding(build_embedding(f), tmp_path)
    path.write_bytes(b"garbage")
    assert load_embedding(f, 300, tmp_path) is None
