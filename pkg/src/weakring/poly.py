"""Integer polynomials and dense arithmetic in F_q[x].

Polynomials over F_q are plain lists of ints, lowest degree first, with no
trailing zeros (the zero polynomial is ``[]``).  Multiplication packs both
operands into big integers (Kronecker substitution), so CPython's big-int
multiply does the convolution; reduction modulo a fixed monic ``f`` uses a
precomputed reversed inverse (Barrett style).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with arbitrary-precision integer coefficients.

    ``coeffs[i]`` is the coefficient of ``x**i``; trailing zeros are stripped.
    """

    coeffs: tuple

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_terms(cls, terms: Mapping[int, int]) -> "IntPolynomial":
        if not terms:
            return cls(())
        c = [0] * (max(terms) + 1)
        for k, v in terms.items():
            c[k] += int(v)
        return cls(tuple(c))

    @classmethod
    def x_power(cls, n: int) -> "IntPolynomial":
        return cls.from_terms({n: 1})

    @property
    def degree(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    @property
    def is_monic(self) -> bool:
        return self.leading == 1

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPolynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return IntPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        rhs = [(j, c) for j, c in enumerate(other.coeffs) if c]
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in rhs:
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def divmod_monic(self, divisor: "IntPolynomial"):
        """Exact-integer long division by a monic divisor."""
        if not divisor.is_monic:
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        d = divisor.degree
        nz = [(j, c) for j, c in enumerate(divisor.coeffs[:-1]) if c]
        quot = [0] * max(len(rem) - d, 0)
        for k in range(len(rem) - 1, d - 1, -1):
            c = rem[k]
            if c:
                quot[k - d] = c
                rem[k] = 0
                for j, b in nz:
                    rem[k - d + j] -= c * b
        return IntPolynomial(tuple(quot)), IntPolynomial(tuple(rem[:d]))

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def mod(self, q: int) -> list:
        """Coefficient list reduced into [0, q), trailing zeros removed."""
        return trim([c % q for c in self.coeffs])

    def nonzero_terms(self) -> dict:
        return {i: c for i, c in enumerate(self.coeffs) if c}

    def to_json(self) -> dict:
        return {"coeffs": [str(c) for c in self.coeffs], "var": "x"}

    @classmethod
    def from_json(cls, obj) -> "IntPolynomial":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or "coeffs" not in obj:
            raise ValueError("polynomial JSON needs a 'coeffs' list")
        if set(obj) - {"coeffs", "var"}:
            raise ValueError(f"unknown polynomial keys: {sorted(set(obj) - {'coeffs', 'var'})}")
        coeffs = obj["coeffs"]
        if not isinstance(coeffs, list) or not all(isinstance(c, str) for c in coeffs):
            raise ValueError("'coeffs' must be a list of decimal strings")
        return cls(tuple(int(c) for c in coeffs))

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            mag = abs(c)
            body = mono if (mag == 1 and mono) else (f"{mag}*{mono}" if mono else str(mag))
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"IntPolynomial({self})"


def _as_poly(v) -> IntPolynomial:
    if isinstance(v, IntPolynomial):
        return v
    if isinstance(v, int):
        return IntPolynomial((v,))
    raise TypeError(f"cannot treat {type(v).__name__} as a polynomial")


def trinomial(n: int, a: int, b: int) -> IntPolynomial:
    """x^n + a*x + b"""
    return IntPolynomial.from_terms({n: 1, 1: a, 0: b})


# --------------------------------------------------------------------------
# F_q[x] on coefficient lists


def trim(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def deg(c: Sequence[int]) -> int:
    return len(c) - 1


def pm_add(u, v, q):
    if len(u) < len(v):
        u, v = v, u
    out = list(u)
    for i, c in enumerate(v):
        out[i] = (out[i] + c) % q
    return trim(out)


def pm_sub(u, v, q):
    n = max(len(u), len(v))
    out = [0] * n
    for i, c in enumerate(u):
        out[i] = c
    for i, c in enumerate(v):
        out[i] = (out[i] - c) % q
    return trim(out)


def pm_scale(u, s, q):
    s %= q
    return trim([c * s % q for c in u]) if s else []


def _slot_bytes(length: int, q: int) -> int:
    bound = length * (q - 1) ** 2
    return bound.bit_length() // 8 + 1


def _pack(u, nbytes: int) -> int:
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in u), "little")


def pm_mul(u, v, q):
    """Product in F_q[x]; inputs must already be reduced into [0, q)."""
    if not u or not v:
        return []
    if len(u) < 16 or len(v) < 16:
        out = [0] * (len(u) + len(v) - 1)
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(v):
                    out[i + j] += a * b
        return trim([c % q for c in out])
    nbytes = _slot_bytes(min(len(u), len(v)), q)
    U = _pack(u, nbytes)
    W = U * U if u is v else U * _pack(v, nbytes)
    total = len(u) + len(v) - 1
    raw = W.to_bytes(total * nbytes, "little")
    return trim([int.from_bytes(raw[i:i + nbytes], "little") % q
                 for i in range(0, total * nbytes, nbytes)])


def pm_divmod(u, v, q):
    """Long division in F_q[x] (q prime); returns (quotient, remainder)."""
    if not v:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(u)
    dv = len(v) - 1
    if len(rem) - 1 < dv:
        return [], trim(rem)
    inv = pow(v[-1], -1, q)
    nz = [(j, c) for j, c in enumerate(v[:-1]) if c]
    quot = [0] * (len(rem) - dv)
    for k in range(len(rem) - 1, dv - 1, -1):
        c = rem[k] % q
        if c:
            c = c * inv % q
            quot[k - dv] = c
            base = k - dv
            for j, b in nz:
                rem[base + j] -= c * b
        rem[k] = 0
    return trim(quot), trim([c % q for c in rem[:dv]])


def pm_rem(u, v, q):
    return pm_divmod(u, v, q)[1]


def pm_monic(u, q):
    if not u:
        return []
    return pm_scale(u, pow(u[-1], -1, q), q)


def pm_gcd(u, v, q):
    """Monic gcd in F_q[x]."""
    a, b = trim(list(u)), trim(list(v))
    while b:
        a, b = b, pm_rem(a, b, q)
    return pm_monic(a, q)


def pm_eval(u, x, q):
    acc = 0
    for c in reversed(u):
        acc = (acc * x + c) % q
    return acc


def pm_derivative(u, q):
    return trim([(i * c) % q for i, c in enumerate(u)][1:])


def _series_inverse(h, k, q):
    """Inverse of h modulo x^k in F_q[x], h[0] invertible (Newton iteration)."""
    g = [pow(h[0], -1, q)]
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        hg = pm_mul(h[:prec], g, q)[:prec]
        # g <- g * (2 - h g)
        t = [(-c) % q for c in hg] + [0] * (prec - len(hg))
        t[0] = (t[0] + 2) % q
        g = pm_mul(g, trim(t), q)[:prec]
    return trim(g[:k])


class QuotientRing:
    """Arithmetic in F_q[x]/(f) for monic f (reduction by precomputed inverse)."""

    def __init__(self, f, q: int):
        f = trim([c % q for c in f])
        if not f:
            raise ValueError("modulus polynomial vanishes mod q")
        if f[-1] != 1:
            f = pm_monic(f, q)
        self.f = f
        self.q = q
        self.n = len(f) - 1
        n = self.n
        self._rev_inv = _series_inverse(f[::-1], max(n - 1, 1), q) if n > 1 else [1]

    def reduce(self, u):
        q, n, f = self.q, self.n, self.f
        u = trim([c % q for c in u])
        if len(u) <= n:
            return u
        if len(u) > 2 * n - 1:
            return pm_rem(u, f, q)
        m = len(u) - n  # quotient has m coefficients
        rev_top = u[::-1][:m]
        qrev = pm_mul(trim(list(rev_top)), self._rev_inv[:m], q)[:m]
        qrev = qrev + [0] * (m - len(qrev))
        quot = trim(qrev[::-1])
        prod = pm_mul(quot, f, q)
        out = [(u[i] - (prod[i] if i < len(prod) else 0)) % q for i in range(n)]
        return trim(out)

    def mul(self, u, v):
        return self.reduce(pm_mul(u, v, self.q))

    def sqr(self, u):
        return self.reduce(pm_mul(u, u, self.q))

    def mul_x(self, u):
        if not u:
            return []
        u = [0] + list(u)
        if len(u) <= self.n:
            return u
        c = u[-1]
        f, q = self.f, self.q
        return trim([(u[i] - c * f[i]) % q for i in range(self.n)])

    def pow(self, base, e: int):
        result = [1]
        b = self.reduce(base)
        for bit in bin(e)[2:]:
            result = self.sqr(result)
            if bit == "1":
                result = self.mul(result, b)
        return result if self.n > 0 else []

    def pow_x(self, e: int):
        """x^e mod (f, q) by left-to-right square-and-multiply-by-x."""
        result = [1]
        for bit in bin(e)[2:]:
            result = self.sqr(result)
            if bit == "1":
                result = self.mul_x(result)
        return self.reduce(result)


# --------------------------------------------------------------------------
# Q[x] (exact rationals), used by the extended Euclid of Algorithm-3 style searches


def _q_trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def qpoly_divmod(u, v):
    rem = [Fraction(c) for c in u]
    dv = len(v) - 1
    if len(rem) - 1 < dv:
        return [], _q_trim(rem)
    lead = Fraction(v[-1])
    nz = [(j, Fraction(c)) for j, c in enumerate(v[:-1]) if c]
    quot = [Fraction(0)] * (len(rem) - dv)
    for k in range(len(rem) - 1, dv - 1, -1):
        c = rem[k]
        if c:
            c = c / lead
            quot[k - dv] = c
            for j, b in nz:
                rem[k - dv + j] -= c * b
        rem[k] = Fraction(0)
    return _q_trim(quot), _q_trim(rem[:dv])


def _q_sub(u, v):
    n = max(len(u), len(v))
    out = [Fraction(0)] * n
    for i, c in enumerate(u):
        out[i] += c
    for i, c in enumerate(v):
        out[i] -= c
    return _q_trim(out)


def _q_mul(u, v):
    if not u or not v:
        return []
    out = [Fraction(0)] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                if b:
                    out[i + j] += a * b
    return _q_trim(out)


def qpoly_xgcd(u: Iterable, v: Iterable):
    """Extended Euclid over Q[x]: returns (g, s, t) with s*u + t*v = g, g monic.

    Fractions are kept in lowest terms by ``fractions.Fraction`` at every step.
    """
    r0, r1 = _q_trim([Fraction(c) for c in u]), _q_trim([Fraction(c) for c in v])
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while r1:
        quot, rem = qpoly_divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, _q_sub(s0, _q_mul(quot, s1))
        t0, t1 = t1, _q_sub(t0, _q_mul(quot, t1))
    lead = r0[-1]
    return ([c / lead for c in r0], [c / lead for c in s0], [c / lead for c in t0])


def denominators_lcm(*polys) -> int:
    d = 1
    for p in polys:
        for c in p:
            d = lcm(d, Fraction(c).denominator)
    return d
