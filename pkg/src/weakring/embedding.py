"""Canonical embedding of Z[x]/(f) into R^n at high precision.

Real numbers are ``gmpy2.mpfr`` values held in numpy object arrays, so every
elementwise operation runs at the precision of the active gmpy2 context.  The
context is thread-local; use :meth:`EmbeddingData.context` around any
arithmetic on embedded vectors.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import zlib
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import (PowerIterationDiverged, PrecisionInsufficient, RepeatedRootSuspected,
                     RoundingAmbiguous)
from .poly import IntPolynomial, QuotientRing

DEFAULT_PRECISION = 300
GUARD_BITS = 32
_MPFR = type(mpfr(0))
CACHE_FORMAT_VERSION = 1
_CACHE_MAGIC = b"WKEMB\x00"


def hp(precision_bits: int):
    return gmpy2.context(precision=precision_bits)


class RootSet(NamedTuple):
    roots: list          # mpc, embedding order sigma_1..sigma_n
    row_key: list        # "real" / "complex_re" / "complex_im" per row of M
    r1: int
    r2: int
    errors: list         # mpfr, magnitude of the last Newton correction per root


# --------------------------------------------------------------------------
# roots


def _initial_guesses(coeffs: Sequence[int]) -> list:
    n = len(coeffs) - 1
    try:
        with np.errstate(all="raise"):
            z = np.roots(np.array([float(c) for c in coeffs[::-1]]))
        if len(z) == n and np.all(np.isfinite(z)):
            return [complex(v) for v in z]
    except (FloatingPointError, OverflowError, np.linalg.LinAlgError):
        pass
    # fall back to points on a circle of the Cauchy-bound radius
    lead = abs(coeffs[-1])
    radius = 1 + max(abs(c) for c in coeffs[:-1]) / lead
    radius = min(radius, 1e300) ** 0.5
    return [radius * complex(math.cos(2 * math.pi * k / n + 0.4), math.sin(2 * math.pi * k / n + 0.4))
            for k in range(n)]


def _eval_with_derivative(coeffs, terms, z):
    """(f(z), f'(z)) for an object array z of mpc."""
    n = len(coeffs) - 1
    if len(terms) * 8 < n:
        p = np.array([mpc(0)] * len(z), dtype=object)
        dp = np.array([mpc(0)] * len(z), dtype=object)
        for k, c in terms:
            zk1 = np.array([zi ** (k - 1) for zi in z], dtype=object) if k >= 1 else None
            if k == 0:
                p = p + c
            else:
                p = p + c * zk1 * z
                dp = dp + (k * c) * zk1
        return p, dp
    p = np.array([mpc(coeffs[-1])] * len(z), dtype=object)
    dp = np.array([mpc(0)] * len(z), dtype=object)
    for c in reversed(coeffs[:-1]):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _aberth(coeffs, z, work_prec, max_iter=500):
    terms = [(k, c) for k, c in enumerate(coeffs) if c]
    n = len(z)
    eye = np.eye(n, dtype=bool)
    target = mpfr(2) ** (-(work_prec - 8))
    corr = None
    for _ in range(max_iter):
        p, dp = _eval_with_derivative(coeffs, terms, z)
        diff = z[:, None] - z[None, :]
        diff[eye] = mpc(1)
        inv = 1 / diff
        inv[eye] = mpc(0)
        s = inv.sum(axis=1)
        ratio = p / dp
        corr = ratio / (1 - ratio * s)
        z = z - corr
        scale = [max(mpfr(1), abs(zi)) for zi in z]
        if all(abs(c) <= target * sc for c, sc in zip(corr, scale)):
            break
    else:
        raise PrecisionInsufficient("Aberth iteration did not converge")
    # one more Newton step gives a per-root error estimate
    p, dp = _eval_with_derivative(coeffs, terms, z)
    newton = p / dp
    z = z - newton
    return z, [abs(c) for c in newton]


def complex_roots(f: IntPolynomial, precision_bits: int = DEFAULT_PRECISION) -> RootSet:
    """All complex roots of squarefree f, ordered as the embeddings sigma_1..sigma_n.

    Real roots come first (ascending), then one representative per conjugate
    pair (positive imaginary part, ascending real part, ties by imaginary part),
    then the conjugates in the same order.
    """
    coeffs = list(f.coeffs)
    n = f.degree
    if n < 1:
        raise ValueError("need a nonconstant polynomial")
    work = precision_bits + GUARD_BITS
    with hp(work):
        z0 = np.array([mpc(complex(v)) for v in _initial_guesses(coeffs)], dtype=object)
        z, errs = _aberth(coeffs, z0, work)
        half = mpfr(2) ** (-(precision_bits // 2))
        quarter = mpfr(2) ** (-(precision_bits // 4))
        norm1 = sum(abs(mpfr(c)) for c in coeffs)
        terms = [(k, c) for k, c in enumerate(coeffs) if c]
        p, _ = _eval_with_derivative(coeffs, terms, z)
        for zi, pi in zip(z, p):
            scale = max(mpfr(1), abs(zi)) ** n
            if abs(pi) > half * norm1 * scale:
                raise PrecisionInsufficient(f"root residual {float(abs(pi)):.3g} too large")
        reals, uppers, lowers = [], [], []
        for zi, ei in zip(z, errs):
            tol = half * max(mpfr(1), abs(zi))
            if abs(zi.imag) < tol:
                reals.append((mpc(zi.real, 0), ei))
            elif zi.imag > 0:
                uppers.append((zi, ei))
            else:
                lowers.append((zi, ei))
        if len(uppers) != len(lowers):
            raise PrecisionInsufficient("complex roots do not pair into conjugates")
        remaining = list(lowers)
        paired = []
        for u, eu in uppers:
            j = min(range(len(remaining)), key=lambda k: abs(remaining[k][0] - u.conjugate()))
            l, el = remaining.pop(j)
            if abs(l - u.conjugate()) > half * max(mpfr(1), abs(u)):
                raise PrecisionInsufficient("conjugate pairing tolerance exceeded")
            paired.append((u, max(eu, el)))
        reals.sort(key=lambda t: t[0].real)
        paired.sort(key=lambda t: (t[0].real, t[0].imag))
        roots = [r for r, _ in reals] + [u for u, _ in paired] + [u.conjugate() for u, _ in paired]
        errors = [e for _, e in reals] + [e for _, e in paired] * 2
        for i in range(n):
            for j in range(i + 1, n):
                if abs(roots[i] - roots[j]) < quarter * max(mpfr(1), abs(roots[i])):
                    raise RepeatedRootSuspected(f"roots {i} and {j} closer than tolerance")
    with hp(precision_bits):
        roots = [mpc(r) for r in roots]
        errors = [mpfr(e) for e in errors]
    r1, r2 = len(reals), len(paired)
    key = ["real"] * r1 + ["complex_re"] * r2 + ["complex_im"] * r2
    return RootSet(roots, key, r1, r2, errors)


# --------------------------------------------------------------------------
# embedding matrix


@dataclass(frozen=True)
class EmbeddingData:
    f: IntPolynomial
    precision_bits: int
    roots: tuple
    row_key: tuple
    M: np.ndarray
    M_inv: np.ndarray
    det_abs: object
    r1: int
    r2: int

    @property
    def n(self) -> int:
        return self.f.degree

    def context(self):
        return hp(self.precision_bits)

    def embed(self, coords) -> np.ndarray:
        """theta of the ring element with the given power-basis coordinates."""
        with self.context():
            return self.M.dot(np.array([int(c) for c in coords], dtype=object))

    def coordinates_real(self, v) -> np.ndarray:
        with self.context():
            return self.M_inv.dot(np.asarray(v, dtype=object))

    def coordinates(self, v) -> list:
        """Power-basis coordinates of a lattice vector, rounded with an ambiguity check."""
        return round_checked(self.coordinates_real(v), self.precision_bits)

    def scaled(self, c) -> "EmbeddingData":
        """Same lattice with M replaced by c*M (used to check scale invariance)."""
        with self.context():
            c = mpfr(c)
            return EmbeddingData(self.f, self.precision_bits, self.roots, self.row_key,
                                 self.M * c, self.M_inv / c, self.det_abs * c ** self.n,
                                 self.r1, self.r2)

    def sigma_scale(self):
        """det(M)^(1/n), the factor turning sigma into the covolume-adjusted sigma'."""
        with self.context():
            return self.det_abs ** (mpfr(1) / self.n)


def round_checked(c, precision_bits: int) -> list:
    margin = mpfr(0.5) - mpfr(2) ** (-(precision_bits // 4))
    out = []
    for x in c:
        k = gmpy2.rint(x)
        if abs(x - k) >= margin:
            raise RoundingAmbiguous(f"coordinate {float(x):.6g} is too close to a half-integer")
        out.append(int(k))
    return out


def _lu(A: np.ndarray):
    """In-place style LU with partial pivoting on a copy; returns (perm, LU, sign)."""
    n = A.shape[0]
    LU = A.copy()
    perm = list(range(n))
    for k in range(n):
        col = LU[k:, k]
        piv = k + max(range(n - k), key=lambda i: abs(col[i]))
        if LU[piv, k] == 0:
            raise PrecisionInsufficient("embedding matrix is numerically singular")
        if piv != k:
            LU[[k, piv], :] = LU[[piv, k], :]
            perm[k], perm[piv] = perm[piv], perm[k]
        if k + 1 < n:
            LU[k + 1:, k] = LU[k + 1:, k] / LU[k, k]
            LU[k + 1:, k + 1:] = LU[k + 1:, k + 1:] - np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return perm, LU


def _lu_inverse(perm, LU) -> np.ndarray:
    n = LU.shape[0]
    # P A = L U  =>  A^-1 = U^-1 L^-1 P
    Y = np.empty((n, n), dtype=object)
    zero, one = mpfr(0), mpfr(1)
    for i in range(n):
        row = np.array([zero] * n, dtype=object)
        row[perm[i]] = one
        if i:
            row = row - LU[i, :i].dot(Y[:i, :])
        Y[i, :] = row
    X = np.empty((n, n), dtype=object)
    for i in range(n - 1, -1, -1):
        row = Y[i, :]
        if i + 1 < n:
            row = row - LU[i, i + 1:].dot(X[i + 1:, :])
        X[i, :] = row / LU[i, i]
    return X


def build_embedding(f: IntPolynomial, precision_bits: int = DEFAULT_PRECISION,
                    cache_dir: Optional[os.PathLike] = None) -> EmbeddingData:
    """M with columns theta(alpha^i), its LU inverse and |det M|.

    Rows follow the theta convention: real embeddings, then real parts of one
    embedding per conjugate pair, then the matching imaginary parts.
    """
    if cache_dir is not None:
        cached = load_embedding(f, precision_bits, cache_dir)
        if cached is not None:
            return cached
    emb = _build_embedding(f, precision_bits)
    if cache_dir is not None:
        save_embedding(emb, cache_dir)
    return emb


@lru_cache(maxsize=8)
def _build_embedding(f: IntPolynomial, precision_bits: int) -> EmbeddingData:
    if not f.is_monic:
        raise ValueError("embedding needs a monic polynomial")
    rs = complex_roots(f, precision_bits)
    n = f.degree
    with hp(precision_bits):
        reps = rs.roots[: rs.r1 + rs.r2]
        M = np.empty((n, n), dtype=object)
        for idx, z in enumerate(reps):
            pw = mpc(1)
            for j in range(n):
                if idx < rs.r1:
                    M[idx, j] = pw.real
                else:
                    M[idx, j] = pw.real
                    M[idx + rs.r2, j] = pw.imag
                pw = pw * z
        perm, LU = _lu(M)
        det_abs = mpfr(1)
        for i in range(n):
            det_abs *= abs(LU[i, i])
        M_inv = _lu_inverse(perm, LU)
        E = M.dot(M_inv)
        tol = mpfr(2) ** (-(precision_bits // 2))
        for i in range(n):
            for j in range(n):
                e = E[i, j] - (1 if i == j else 0)
                if abs(e) >= tol:
                    raise PrecisionInsufficient(
                        f"M*M_inv deviates from I by {float(abs(e)):.3g} at ({i},{j})")
    M.flags.writeable = False
    M_inv.flags.writeable = False
    return EmbeddingData(f, precision_bits, tuple(rs.roots), tuple(rs.row_key), M, M_inv,
                         det_abs, rs.r1, rs.r2)


# --------------------------------------------------------------------------
# spectral quantities


@dataclass(frozen=True)
class SpectralReport:
    rho: object               # ||M^-1||_2
    m_norm: object            # ||M||_2
    rho_prime: object         # rho * det(M)^(1/n)
    condition_number: object  # ||M||_2 ||M^-1||_2
    tau: Optional[object] = None
    spectral_bound_met: Optional[bool] = None
    iterations: int = 0

    def to_json(self) -> dict:
        def s(v):
            return None if v is None else decimal_string(v)
        return {"rho": s(self.rho), "m_norm": s(self.m_norm), "rho_prime": s(self.rho_prime),
                "condition_number": s(self.condition_number), "tau": s(self.tau),
                "spectral_bound_met": self.spectral_bound_met, "iterations": self.iterations}


def _exact_mpfr(v):
    # mpfr(v) would round an existing high-precision value to the ambient context
    return v if isinstance(v, _MPFR) else mpfr(v)


def decimal_string(v, digits: int = 30) -> str:
    return format(_exact_mpfr(v), f".{digits}g")


def _to_float_matrix(A) -> Optional[np.ndarray]:
    try:
        with np.errstate(over="raise", invalid="raise"):
            Af = np.array([[float(x) for x in row] for row in A], dtype=float)
    except (OverflowError, FloatingPointError):
        return None
    if not np.all(np.isfinite(Af)) or not np.any(Af):
        return None
    return Af


def spectral_norm(A: np.ndarray, precision_bits: int, rel_tol: float = 1e-10,
                  max_iter: int = 10_000):
    """Largest singular value of A by power iteration on A^T A.

    A float64 pass finds the dominant direction, then iterations continue at
    ``precision_bits`` until the estimate changes by less than ``rel_tol``.
    Returns (sigma_max, iterations).
    """
    n = A.shape[1]
    v = np.array([1.0 + k / (3.0 * n) for k in range(n)])
    v /= np.linalg.norm(v)
    trace = []
    iters = 0
    Af = _to_float_matrix(A)
    if Af is not None:
        prev = 0.0
        for iters in range(1, max_iter + 1):
            w = Af @ v
            s = float(np.linalg.norm(w))
            u = Af.T @ w
            nu = np.linalg.norm(u)
            if nu == 0:
                break
            v = u / nu
            trace.append(s)
            if prev and abs(s - prev) <= 1e-13 * s:
                break
            prev = s
        else:
            raise PowerIterationDiverged("float power iteration did not settle", trace[-20:])
    with hp(precision_bits):
        vv = np.array([mpfr(float(x)) for x in v], dtype=object)
        vv = vv / gmpy2.sqrt(sum(x * x for x in vv))
        prev = None
        for k in range(1, max_iter + 1):
            w = A.dot(vv)
            s = gmpy2.sqrt(sum(x * x for x in w))
            u = A.T.dot(w)
            nu = gmpy2.sqrt(sum(x * x for x in u))
            if nu == 0:
                return s, iters + k
            vv = u / nu
            trace.append(float(s))
            if prev is not None and abs(s - prev) <= rel_tol * s:
                return s, iters + k
            prev = s
    raise PowerIterationDiverged("power iteration did not reach the tolerance", trace[-20:])


def spectral_stats(emb: EmbeddingData, w=None, q=None) -> SpectralReport:
    """rho = ||M^-1||_2, rho' = rho det^(1/n), condition number, optional tau and bound.

    With both ``w`` and ``q`` the report records whether rho' < q / (4 w n).
    """
    rho, it1 = spectral_norm(emb.M_inv, emb.precision_bits)
    m_norm, it2 = spectral_norm(emb.M, emb.precision_bits)
    with emb.context():
        rho_prime = rho * emb.det_abs ** (mpfr(1) / emb.n)
        k = rho * m_norm
        t = bound = None
        if w is not None and q is not None:
            t = tau(emb.n, int(q), w)
            bound = bool(rho_prime < mpfr(int(q)) / (4 * mpfr(w) * emb.n))
    return SpectralReport(rho, m_norm, rho_prime, k, t, bound, it1 + it2)


def family_rho_prime(n: int, q: int, precision_bits: int = 128):
    """Closed form 2^(-r2/n) * sqrt((q-1)^(1-1/n)) for x^n + q - 1, as printed."""
    r2 = n // 2
    with hp(precision_bits):
        return mpfr(2) ** (-mpfr(r2) / n) * gmpy2.sqrt(mpfr(q - 1) ** (1 - mpfr(1) / n))


def tau(n: int, q: int, w, precision_bits: int = 128):
    """q / (2 sqrt2 w n (q-1)^(1/2 - 1/(2n))); above 1 the family attack is provable."""
    with hp(precision_bits):
        w = mpfr(str(w)) if isinstance(w, str) else mpfr(w)
        expo = mpfr(1) / 2 - mpfr(1) / (2 * n)
        return mpfr(q) / (2 * gmpy2.sqrt(mpfr(2)) * w * n * mpfr(q - 1) ** expo)


def transport_to_residue(v, emb: EmbeddingData, alpha: int, q) -> int:
    """Round M^-1 v to integer coordinates c and return sum c_i alpha^i mod q."""
    q = int(q)
    coords = emb.coordinates(v)
    acc = 0
    for c in reversed(coords):
        acc = (acc * alpha + c) % q
    return acc


def ring_multiply(u, v, emb: EmbeddingData, q) -> np.ndarray:
    """Product of two embedded lattice vectors, computed in F_q[x]/(f) and re-embedded."""
    q = int(q)
    ring = _quotient_ring(emb.f, q)
    cu = [c % q for c in emb.coordinates(u)]
    cv = [c % q for c in emb.coordinates(v)]
    prod = ring.mul(cu, cv)
    return emb.embed(prod + [0] * (emb.n - len(prod)))


@lru_cache(maxsize=32)
def _quotient_ring(f: IntPolynomial, q: int) -> QuotientRing:
    return QuotientRing(list(f.coeffs), q)


# --------------------------------------------------------------------------
# disk cache


def mpfr_to_hex(x) -> str:
    mant, exp = _exact_mpfr(x).as_mantissa_exp()
    return f"{int(mant):x}p{int(exp)}"


def mpfr_from_hex(s: str, precision_bits: int):
    m, e = s.split("p")
    mant = int(m, 16)
    with hp(max(precision_bits, abs(mant).bit_length(), 2)):
        return gmpy2.mul_2exp(mpfr(mant), int(e))


def cache_key(f: IntPolynomial, precision_bits: int) -> str:
    h = hashlib.sha256(json.dumps(f.to_json(), sort_keys=True).encode()).hexdigest()[:24]
    return f"{h}_{precision_bits}"


def save_embedding(emb: EmbeddingData, cache_dir: os.PathLike) -> Path:
    d = Path(cache_dir)
    d.mkdir(parents=True, exist_ok=True)
    payload = {
        "f": emb.f.to_json(),
        "precision_bits": emb.precision_bits,
        "r1": emb.r1,
        "r2": emb.r2,
        "row_key": list(emb.row_key),
        "roots": [[mpfr_to_hex(z.real), mpfr_to_hex(z.imag)] for z in emb.roots],
        "M": [[mpfr_to_hex(x) for x in row] for row in emb.M],
        "M_inv": [[mpfr_to_hex(x) for x in row] for row in emb.M_inv],
        "det_abs": mpfr_to_hex(emb.det_abs),
    }
    blob = _CACHE_MAGIC + bytes([CACHE_FORMAT_VERSION]) + zlib.compress(
        json.dumps(payload).encode(), 6)
    path = d / f"{cache_key(emb.f, emb.precision_bits)}.wkemb"
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    with os.fdopen(fd, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)
    return path


def load_embedding(f: IntPolynomial, precision_bits: int,
                   cache_dir: os.PathLike) -> Optional[EmbeddingData]:
    path = Path(cache_dir) / f"{cache_key(f, precision_bits)}.wkemb"
    if not path.exists():
        return None
    blob = path.read_bytes()
    if not blob.startswith(_CACHE_MAGIC) or blob[len(_CACHE_MAGIC)] != CACHE_FORMAT_VERSION:
        return None
    payload = json.loads(zlib.decompress(blob[len(_CACHE_MAGIC) + 1:]))
    if IntPolynomial.from_json(payload["f"]) != f or payload["precision_bits"] != precision_bits:
        return None
    p = precision_bits
    rd = lambda s: mpfr_from_hex(s, p)  # noqa: E731
    with hp(p):
        roots = tuple(mpc(rd(re), rd(im)) for re, im in payload["roots"])
        M = np.array([[rd(x) for x in row] for row in payload["M"]], dtype=object)
        M_inv = np.array([[rd(x) for x in row] for row in payload["M_inv"]], dtype=object)
        det_abs = rd(payload["det_abs"])
    M.flags.writeable = False
    M_inv.flags.writeable = False
    return EmbeddingData(f, p, roots, tuple(payload["row_key"]), M, M_inv, det_abs,
                         payload["r1"], payload["r2"])
