"""Seeded secrets, uniform elements, discrete Gaussian errors and sample sets.

Every random draw comes from a numpy ``Generator`` derived from
``(seed, *path)`` through ``SeedSequence`` spawn keys, so any single sample
can be regenerated on its own and parallel generation stays deterministic.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .embedding import EmbeddingData, _quotient_ring, mpfr_from_hex, mpfr_to_hex
from .errors import IoFailure, PrecisionInsufficient, SchemaViolation
from .poly import IntPolynomial

POLYLWE = "polylwe_coefficient"
RINGLWE = "ringlwe_embedded"
HARD_2SIGMA = "hard_2sigma"
NORM_WARN_ONLY = "norm_warn_only"
DISCRETIZATION = "babai_round_off"

# stream path tags
_SECRET, _SAMPLE, _EXTRA = 0, 1, 2


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *path: int) -> int:
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=tuple(int(p) for p in path))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class GaussianSpec:
    sigma: float
    width_w: float
    sigma_prime: Optional[float] = None
    truncation: str = HARD_2SIGMA

    @classmethod
    def from_width(cls, w, det_scale=None, truncation: str = HARD_2SIGMA) -> "GaussianSpec":
        w = float(w)
        sigma = w / math.sqrt(2 * math.pi)
        sp = None if det_scale is None else sigma * float(det_scale)
        return cls(sigma, w, sp, truncation)

    @classmethod
    def from_sigma(cls, sigma, truncation: str = HARD_2SIGMA) -> "GaussianSpec":
        sigma = float(sigma)
        return cls(sigma, sigma * math.sqrt(2 * math.pi), None, truncation)

    @property
    def bound(self) -> int:
        """Hard truncation bound ceil(2 sigma) on Poly-LWE error coefficients."""
        return math.ceil(2 * self.sigma)

    @property
    def lattice_sigma(self) -> float:
        return self.sigma if self.sigma_prime is None else self.sigma_prime

    def to_json(self) -> dict:
        return {"sigma": repr(self.sigma), "width_w": repr(self.width_w),
                "sigma_prime": None if self.sigma_prime is None else repr(self.sigma_prime),
                "truncation": self.truncation}

    @classmethod
    def from_json(cls, d: dict) -> "GaussianSpec":
        sp = d.get("sigma_prime")
        return cls(float(d["sigma"]), float(d["width_w"]), None if sp is None else float(sp),
                   d.get("truncation", HARD_2SIGMA))


# --------------------------------------------------------------------------
# base samplers


@lru_cache(maxsize=64)
def _cdt(sigma: float):
    k = math.ceil(6 * sigma)
    support = np.arange(-k, k + 1)
    weights = np.exp(-(support.astype(float) ** 2) / (2 * sigma * sigma))
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return support, cdf


def sample_coeff_gaussian(spec: GaussianSpec, n: int, rng: np.random.Generator) -> list:
    """n integer Gaussian coefficients, each redrawn until |e_i| <= ceil(2 sigma)."""
    if spec.sigma <= 0:
        return [0] * n
    support, cdf = _cdt(spec.sigma)
    out = support[np.searchsorted(cdf, rng.random(n), side="right").clip(max=len(cdf) - 1)]
    if spec.truncation == HARD_2SIGMA:
        bound = spec.bound
        bad = np.abs(out) > bound
        while bad.any():
            idx = np.flatnonzero(bad)
            out[idx] = support[np.searchsorted(cdf, rng.random(len(idx)), side="right")
                               .clip(max=len(cdf) - 1)]
            bad = np.abs(out) > bound
    return [int(v) for v in out]


def truncated_variance(sigma: float) -> float:
    """Variance of the sampler above, exactly from its weight table."""
    support, cdf = _cdt(sigma)
    bound = math.ceil(2 * sigma)
    keep = np.abs(support) <= bound
    w = np.diff(np.concatenate([[0.0], cdf]))[keep]
    s = support[keep].astype(float)
    return float((w * s * s).sum() / w.sum())


def sample_uniform_poly(q: int, n: int, rng: np.random.Generator) -> list:
    q = int(q)
    if q < 1 << 62:
        return [int(v) for v in rng.integers(0, q, size=n, dtype=np.int64)]
    nbytes = (q.bit_length() + 7) // 8 + 8
    out = []
    for _ in range(n):
        out.append(int.from_bytes(rng.bytes(nbytes), "little") % q)
    return out


# --------------------------------------------------------------------------
# sample sets


@dataclass
class LweSampleSet:
    variant: str
    f: IntPolynomial
    q: int
    gaussian: GaussianSpec
    seed: int
    samples: list = field(default_factory=list)
    secret_commitment: str = ""
    precision_bits: Optional[int] = None
    discretization: Optional[str] = None

    @property
    def n(self) -> int:
        return self.f.degree

    @property
    def count(self) -> int:
        return len(self.samples)

    def __len__(self):
        return len(self.samples)

    def subset(self, start: int, stop: Optional[int] = None) -> "LweSampleSet":
        return LweSampleSet(self.variant, self.f, self.q, self.gaussian, self.seed,
                            self.samples[start:stop], self.secret_commitment,
                            self.precision_bits, self.discretization)

    # JSON lines: header, then one object per sample
    def to_jsonl(self) -> str:
        header = {"variant": self.variant, "q": str(self.q), "n": self.n, "f": self.f.to_json(),
                  "gaussian": self.gaussian.to_json(), "seed": str(self.seed),
                  "secret_commitment": self.secret_commitment, "count": self.count,
                  "precision_bits": self.precision_bits, "discretization": self.discretization}
        lines = [json.dumps(header, sort_keys=True)]
        for a, b in self.samples:
            if self.variant == POLYLWE:
                rec = {"a": [str(v) for v in a], "b": [str(v) for v in b]}
            else:
                rec = {"a": [mpfr_to_hex(v) for v in a], "b": [mpfr_to_hex(v) for v in b]}
            lines.append(json.dumps(rec))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "LweSampleSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise SchemaViolation("$", "empty sample file")
        try:
            h = json.loads(lines[0])
            variant = h["variant"]
            f = IntPolynomial.from_json(h["f"])
            q = int(h["q"])
            out = cls(variant, f, q, GaussianSpec.from_json(h["gaussian"]), int(h["seed"]),
                      [], h.get("secret_commitment", ""), h.get("precision_bits"),
                      h.get("discretization"))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaViolation("$.header", str(exc)) from exc
        if variant not in (POLYLWE, RINGLWE):
            raise SchemaViolation("$.header.variant", f"unknown variant {variant!r}")
        for i, ln in enumerate(lines[1:]):
            rec = json.loads(ln)
            if variant == POLYLWE:
                a = [int(v) for v in rec["a"]]
                b = [int(v) for v in rec["b"]]
                if any(not 0 <= v < q for v in a + b):
                    raise SchemaViolation(f"$.samples[{i}]", "coefficient outside [0, q)")
            else:
                p = out.precision_bits
                with gmpy2.context(precision=p):
                    a = np.array([mpfr_from_hex(v, p) for v in rec["a"]], dtype=object)
                    b = np.array([mpfr_from_hex(v, p) for v in rec["b"]], dtype=object)
            out.samples.append((a, b))
        if h.get("count") is not None and int(h["count"]) != out.count:
            raise SchemaViolation("$.header.count", "does not match the number of samples")
        return out

    def save(self, path) -> None:
        _atomic_write(Path(path), self.to_jsonl())

    @classmethod
    def load(cls, path) -> "LweSampleSet":
        try:
            return cls.from_jsonl(Path(path).read_text())
        except OSError as exc:
            raise IoFailure(str(exc)) from exc


def _atomic_write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def commitment(coeffs: Sequence[int]) -> str:
    return hashlib.sha256(",".join(str(int(c)) for c in coeffs).encode()).hexdigest()


def uniform_secret(q: int, n: int, seed: int) -> list:
    return sample_uniform_poly(q, n, stream(seed, _SECRET))


def gen_polylwe_samples(f: IntPolynomial, q, spec: GaussianSpec, secret: Sequence[int],
                        ell: int, seed: int) -> LweSampleSet:
    """ell pairs (a, a*s + e) in F_q[x]/(f); sample i uses stream (seed, 1, i)."""
    q = int(q)
    n = f.degree
    s = [int(c) % q for c in secret]
    if len(s) > n:
        raise ValueError("secret has more coefficients than the ring degree")
    ring = _quotient_ring(f, q)
    out = LweSampleSet(POLYLWE, f, q, spec, seed, [], commitment(s))
    for i in range(ell):
        rng = stream(seed, _SAMPLE, i)
        a = sample_uniform_poly(q, n, rng)
        e = sample_coeff_gaussian(spec, n, rng)
        prod = ring.mul(a, s)
        prod = prod + [0] * (n - len(prod))
        b = [(x + y) % q for x, y in zip(prod, e)]
        out.samples.append((a, b))
    return out


def uniform_samples_like(template: LweSampleSet, seed: int, embedding: EmbeddingData = None
                         ) -> LweSampleSet:
    """Control set with the same shape as ``template`` but b uniform and independent of a."""
    q, n = template.q, template.n
    out = LweSampleSet(template.variant, template.f, q, template.gaussian, seed, [],
                       "uniform", template.precision_bits, template.discretization)
    for i, (a, _) in enumerate(template.samples):
        rng = stream(seed, _EXTRA, i)
        b = sample_uniform_poly(q, n, rng)
        if template.variant == RINGLWE:
            b = embedding.embed(b)
        out.samples.append((a, b))
    return out


# --------------------------------------------------------------------------
# Ring-LWE


def lattice_gaussian_coordinates(embedding: EmbeddingData, sigma: float,
                                 rng: np.random.Generator) -> list:
    """Integer coordinates of a round-off discretized spherical Gaussian lattice point."""
    n = embedding.n
    if sigma <= 0:
        return [0] * n
    x = rng.normal(0.0, sigma, size=n)
    with embedding.context():
        xv = np.array([mpfr(float(v)) for v in x], dtype=object)
        c = embedding.M_inv.dot(xv)
        back = embedding.M.dot(c)
        err = gmpy2.sqrt(sum((u - v) ** 2 for u, v in zip(back, xv)))
        norm = gmpy2.sqrt(sum(v * v for v in xv))
        if err > mpfr(2) ** (-(embedding.precision_bits // 2)) * norm:
            raise PrecisionInsufficient("embedding round trip lost precision on a Gaussian draw")
        return [int(gmpy2.rint(v)) for v in c]


def sample_lattice_gaussian(embedding: EmbeddingData, spec: GaussianSpec,
                            rng: np.random.Generator) -> np.ndarray:
    """M * round(M^-1 x) for x spherical Gaussian of parameter sigma' (or sigma)."""
    return embedding.embed(lattice_gaussian_coordinates(embedding, spec.lattice_sigma, rng))


def gen_ringlwe_samples(embedding: EmbeddingData, q, spec: GaussianSpec, secret_vector,
                        ell: int, seed: int) -> LweSampleSet:
    """ell embedded pairs (a, b = a*s + e) with b reduced coordinate-wise mod q.

    a and s are multiplied on the polynomial side, as in the reference driver;
    e is a round-off lattice Gaussian of parameter ``spec.sigma_prime``.
    """
    q = int(q)
    n = embedding.n
    if spec.sigma_prime is None:
        raise ValueError("Ring-LWE sampling needs sigma_prime (sigma scaled by det^(1/n))")
    s = [c % q for c in embedding.coordinates(secret_vector)]
    ring = _quotient_ring(embedding.f, q)
    out = LweSampleSet(RINGLWE, embedding.f, q, spec, seed, [], commitment(s),
                       embedding.precision_bits, DISCRETIZATION)
    for i in range(ell):
        rng = stream(seed, _SAMPLE, i)
        a = sample_uniform_poly(q, n, rng)
        e = lattice_gaussian_coordinates(embedding, spec.sigma_prime, rng)
        prod = ring.mul(a, s)
        prod = prod + [0] * (n - len(prod))
        b = [(x + y) % q for x, y in zip(prod, e)]
        out.samples.append((embedding.embed(a), embedding.embed(b)))
    return out


@dataclass(frozen=True)
class NormReport:
    mean_ratio: float
    max_ratio: float
    warning: bool
    draws: int
    over_fraction: float = 0.0   # share of draws with ratio > 1

    def to_json(self) -> dict:
        return {"mean_ratio": self.mean_ratio, "max_ratio": self.max_ratio,
                "warning": self.warning, "draws": self.draws,
                "over_fraction": self.over_fraction}


def error_norm_stats(draws: int, embedding: EmbeddingData, spec: GaussianSpec,
                     seed: int = 0) -> NormReport:
    """Norms of lattice Gaussian draws relative to sqrt(n) * sigma * sqrt(2 pi)."""
    if draws < 1:
        raise ValueError("draws must be positive")
    sigma = spec.lattice_sigma
    n = embedding.n
    if sigma <= 0:
        return NormReport(0.0, 0.0, False, draws)
    scale = math.sqrt(n) * sigma * math.sqrt(2 * math.pi)
    ratios = []
    for i in range(draws):
        v = sample_lattice_gaussian(embedding, spec, stream(seed, _EXTRA, 1 << 20, i))
        with embedding.context():
            ratios.append(float(gmpy2.sqrt(sum(x * x for x in v))) / scale)
    mx = max(ratios)
    over = sum(1 for r in ratios if r > 1) / draws
    return NormReport(sum(ratios) / draws, mx, mx > 1, draws, over)
