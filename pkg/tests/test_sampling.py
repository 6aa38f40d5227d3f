import json
import math

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from weakring.embedding import EmbeddingData, build_embedding, transport_to_residue
from weakring.errors import SchemaViolation
from weakring.poly import IntPolynomial, QuotientRing, trinomial
from weakring.sampling import (DISCRETIZATION, POLYLWE, RINGLWE, GaussianSpec, LweSampleSet,
                               error_norm_stats, gen_polylwe_samples, gen_ringlwe_samples,
                               sample_coeff_gaussian, sample_lattice_gaussian,
                               sample_uniform_poly, stream, truncated_variance,
                               uniform_samples_like, uniform_secret)

X4_256 = IntPolynomial.from_terms({4: 1, 0: 256})
ROW2 = trinomial(128, 524288, 524285)


def identity_embedding(n):
    with gmpy2.context(precision=300):
        eye = np.array([[mpfr(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
        return EmbeddingData(IntPolynomial.from_terms({n: 1, 0: 1}), 300, (), ("real",) * n,
                             eye, eye, mpfr(1), n, 0)


def centered(v, q):
    v %= q
    return v - q if v > q // 2 else v


# GaussianSpec

def test_spec_width_relation():
    spec = GaussianSpec.from_width("8.87", det_scale=2.5)
    assert spec.width_w == pytest.approx(math.sqrt(2 * math.pi) * spec.sigma, rel=1e-12)
    assert spec.sigma_prime / spec.sigma == pytest.approx(2.5, rel=1e-12)
    assert GaussianSpec.from_json(spec.to_json()) == spec
    assert GaussianSpec.from_sigma(3).bound == 6


# coefficient Gaussian

def test_coeff_gaussian_moments_and_truncation():
    sigma = 3.0
    spec = GaussianSpec.from_sigma(sigma)
    draws = np.array(sample_coeff_gaussian(spec, 10**5, stream(1)))
    assert np.abs(draws).max() <= 6
    # closed-form moments of the integer Gaussian restricted to [-6, 6]
    k = np.arange(-6, 7)
    w = np.exp(-k**2 / (2 * sigma**2))
    var = float((w * k**2).sum() / w.sum())
    assert truncated_variance(sigma) == pytest.approx(var, rel=1e-12)
    assert abs(draws.var() - var) < 0.15 * var
    assert abs(draws.mean()) < 0.05


def test_coeff_gaussian_zero_limit():
    assert sample_coeff_gaussian(GaussianSpec.from_sigma(1e-12), 50, stream(2)) == [0] * 50
    assert sample_coeff_gaussian(GaussianSpec.from_sigma(0.0), 5, stream(2)) == [0] * 5


@settings(max_examples=30)
@given(st.floats(0.1, 40), st.integers(0, 2**63))
def test_coeff_gaussian_truncation_holds(sigma, seed):
    spec = GaussianSpec.from_sigma(sigma)
    draws = sample_coeff_gaussian(spec, 500, stream(seed))
    assert max(abs(d) for d in draws) <= math.ceil(2 * sigma)


def test_lp1_parameters():
    spec = GaussianSpec.from_width(8.87)
    draws = sample_coeff_gaussian(spec, 192, stream(3))
    assert len(draws) == 192 and max(abs(d) for d in draws) <= math.ceil(2 * 8.87 / math.sqrt(2 * math.pi))


# uniform

def test_uniform_bits_pass_chi_square():
    bits = np.array(sample_uniform_poly(2, 10**4, stream(4)))
    counts = np.bincount(bits, minlength=2)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_uniform_histogram_flat():
    rng = stream(5)
    vals = np.concatenate([sample_uniform_poly(4093, 192, rng) for _ in range(521)])[:10**5]
    assert vals.min() >= 0 and vals.max() < 4093
    counts = np.bincount(vals * 10 // 4093, minlength=10)
    expect = len(vals) / 10
    assert np.all(np.abs(counts - expect) < 0.05 * expect)
    assert stats.chisquare(np.bincount(vals % 97, minlength=97)).pvalue > 1e-3


def test_uniform_determinism_and_big_modulus():
    assert sample_uniform_poly(4093, 50, stream(6)) == sample_uniform_poly(4093, 50, stream(6))
    q = 2**89 - 1
    vals = sample_uniform_poly(q, 200, stream(7))
    assert all(0 <= v < q for v in vals)
    assert max(vals) > q // 2


# Poly-LWE sample sets

def test_polylwe_zero_error_is_exact():
    q = 257
    spec = GaussianSpec.from_sigma(1e-12)
    s = uniform_secret(q, 4, 9)
    ss = gen_polylwe_samples(X4_256, q, spec, s, 3, seed=10)
    ring = QuotientRing(list(X4_256.coeffs), q)
    for a, b in ss.samples:
        prod = ring.mul(a, s)
        assert b == prod + [0] * (4 - len(prod))


@settings(max_examples=20)
@given(st.integers(0, 2**63))
def test_polylwe_errors_are_truncated_and_reduced(seed):
    q, n = 257, 4
    spec = GaussianSpec.from_sigma(3)
    s = uniform_secret(q, n, seed)
    ss = gen_polylwe_samples(X4_256, q, spec, s, 20, seed)
    ring = QuotientRing(list(X4_256.coeffs), q)
    assert ss.count == 20 and ss.variant == POLYLWE
    for a, b in ss.samples:
        assert all(0 <= v < q for v in a + b)
        prod = ring.mul(a, s) + [0] * n
        e = [centered(bi - pi, q) for bi, pi in zip(b, prod)]
        assert max(abs(x) for x in e) <= 6
        # the residual at alpha = 1 stays inside the acceptance window
        r = (sum(b) - sum(a) * sum(s)) % q
        assert r <= q // 4 or r >= math.ceil(3 * q / 4)


def test_polylwe_samples_are_independently_reconstructible():
    spec = GaussianSpec.from_sigma(3)
    s = uniform_secret(257, 4, 1)
    long = gen_polylwe_samples(X4_256, 257, spec, s, 6, seed=77)
    short = gen_polylwe_samples(X4_256, 257, spec, s, 3, seed=77)
    assert long.samples[:3] == short.samples
    assert long.to_jsonl() == gen_polylwe_samples(X4_256, 257, spec, s, 6, seed=77).to_jsonl()


def test_polylwe_row1_shape():
    q = 2**31 - 1
    f = IntPolynomial.from_terms({1024: 1, 0: q - 1})
    ss = gen_polylwe_samples(f, q, GaussianSpec.from_width(3.192), uniform_secret(q, 1024, 0), 40, 1)
    assert ss.count == 40 and all(len(a) == 1024 and len(b) == 1024 for a, b in ss.samples)


def test_jsonl_round_trip_and_validation(tmp_path):
    spec = GaussianSpec.from_sigma(3)
    ss = gen_polylwe_samples(X4_256, 257, spec, uniform_secret(257, 4, 1), 5, seed=2)
    path = tmp_path / "s.jsonl"
    ss.save(path)
    back = LweSampleSet.load(path)
    assert back.samples == ss.samples and back.gaussian == spec and back.seed == 2
    lines = path.read_text().splitlines()
    rec = json.loads(lines[1])
    rec["a"][0] = "999"
    with pytest.raises(SchemaViolation):
        LweSampleSet.from_jsonl("\n".join([lines[0], json.dumps(rec)] + lines[2:]))
    with pytest.raises(SchemaViolation):
        LweSampleSet.from_jsonl("\n".join(lines[:1] + lines[2:]))


# lattice Gaussian

def test_identity_lattice_is_coordinatewise_rounding():
    emb = identity_embedding(6)
    spec = GaussianSpec(1.0, math.sqrt(2 * math.pi))
    v = sample_lattice_gaussian(emb, spec, stream(12))
    expect = np.rint(stream(12).normal(0.0, 1.0, size=6))
    assert [int(x) for x in v] == [int(x) for x in expect]


def test_x2_plus_2_covariance():
    emb = build_embedding(IntPolynomial((2, 0, 1)))
    spec = GaussianSpec.from_sigma(10.0)
    rng = stream(13)
    pts = np.array([[float(x) for x in sample_lattice_gaussian(emb, spec, rng)]
                    for _ in range(10**4)])
    cov = np.cov(pts.T)
    assert np.all(np.abs(np.diag(cov) - 100) < 15)
    assert abs(cov[0, 1]) < 15


def test_identity_lattice_norm_matches_chi_oracle():
    n = 4
    emb = identity_embedding(n)
    rep = error_norm_stats(3000, emb, GaussianSpec(1.0, math.sqrt(2 * math.pi)), seed=14)
    # rounded N(0,1) has variance sum k^2 P(round = k); scale the chi_4 mean by it
    k = np.arange(-12, 13)
    p = stats.norm.cdf(k + 0.5) - stats.norm.cdf(k - 0.5)
    sd = math.sqrt(float((p * k**2).sum()))
    chi_mean = math.sqrt(2) * special.gamma((n + 1) / 2) / special.gamma(n / 2)
    oracle = sd * chi_mean / (math.sqrt(n) * math.sqrt(2 * math.pi))
    assert rep.mean_ratio == pytest.approx(oracle, rel=0.03)


def test_error_norm_zero_limit():
    rep = error_norm_stats(3, identity_embedding(3), GaussianSpec.from_sigma(0.0))
    assert rep.mean_ratio == 0 and rep.max_ratio == 0 and not rep.warning


def test_n128_norms_stay_below_the_bound():
    emb = build_embedding(ROW2)
    spec = GaussianSpec.from_width(8.0, det_scale=emb.sigma_scale())
    rep = error_norm_stats(1000, emb, spec, seed=15)
    assert rep.over_fraction <= 0.01
    assert rep.warning == (rep.max_ratio > 1)


# Ring-LWE sample sets

def test_ringlwe_zero_error_transport_is_multiplicative():
    f, q = X4_256, 257
    emb = build_embedding(f)
    spec = GaussianSpec(1e-12, 1e-12 * math.sqrt(2 * math.pi), 1e-12)
    secret = emb.embed(uniform_secret(q, 4, 3))
    ss = gen_ringlwe_samples(emb, q, spec, secret, 10, seed=16)
    assert ss.variant == RINGLWE and ss.discretization == DISCRETIZATION
    ts = transport_to_residue(secret, emb, 1, q)
    for a, b in ss.samples:
        assert transport_to_residue(b, emb, 1, q) == transport_to_residue(a, emb, 1, q) * ts % q


def test_ringlwe_requires_sigma_prime():
    emb = build_embedding(X4_256)
    with pytest.raises(ValueError):
        gen_ringlwe_samples(emb, 257, GaussianSpec.from_sigma(1), emb.embed([1, 0, 0, 0]), 1, 0)


def test_ringlwe_jsonl_round_trip_is_bit_exact(tmp_path):
    emb = build_embedding(X4_256)
    spec = GaussianSpec.from_width(2.0, det_scale=emb.sigma_scale())
    ss = gen_ringlwe_samples(emb, 257, spec, emb.embed(uniform_secret(257, 4, 5)), 4, seed=17)
    text = ss.to_jsonl()
    assert text == gen_ringlwe_samples(emb, 257, spec, emb.embed(uniform_secret(257, 4, 5)), 4,
                                       seed=17).to_jsonl()
    back = LweSampleSet.from_jsonl(text)
    assert back.to_jsonl() == text
    for (a, b), (a2, b2) in zip(ss.samples, back.samples):
        assert all(x == y for x, y in zip(a, a2)) and all(x == y for x, y in zip(b, b2))


def test_uniform_control_keeps_a_and_redraws_b():
    spec = GaussianSpec.from_sigma(3)
    ss = gen_polylwe_samples(X4_256, 257, spec, uniform_secret(257, 4, 1), 5, seed=2)
    ctl = uniform_samples_like(ss, seed=3)
    assert [a for a, _ in ctl.samples] == [a for a, _ in ss.samples]
    assert [b for _, b in ctl.samples] != [b for _, b in ss.samples]
