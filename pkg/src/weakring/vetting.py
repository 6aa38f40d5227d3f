"""Finding and checking weak (f, q) pairs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import gmpy2

from .errors import (DegreeMismatch, DoesNotSplit, FactoringBudgetExceeded, NotCoprime,
                     PowerIterationDiverged, PrecisionInsufficient, WeakringError)
from .numtheory import (DEFAULT_FACTOR_BUDGET, PrimeModulus, as_modulus, factorize,
                        is_squarefree, prime_power_base)
from .poly import IntPolynomial, denominators_lcm, pm_gcd, qpoly_xgcd
from .ringcore import (IrreducibilityVerdict, SplitVerdict, cyclotomic_poly,
                       eisenstein_prime, euler_phi, find_roots_mod, is_probably_irreducible,
                       poly_eval_mod, splits_completely)

SPECTRAL_DEGREE_CAP = 256
SMALL_ORDER_BOUND = 16


class Tri(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, v: Optional[bool]) -> "Tri":
        return cls.UNKNOWN if v is None else (cls.HOLDS if v else cls.FAILS)


# --------------------------------------------------------------------------
# primes where f and Phi_m share a root


@dataclass(frozen=True)
class FindQResult:
    q: int
    d: int
    lower_bound_only: bool
    shared_factor_degree: int


def findq_detailed(f: IntPolynomial, m: int, factor_budget: int = DEFAULT_FACTOR_BUDGET,
                   ) -> FindQResult:
    """Largest prime factor of the Bezout denominators for f and Phi_m.

    Exact rational extended Euclid gives u f + v Phi_m = 1; any prime dividing a
    denominator of u or v is one where f and Phi_m share a factor mod q.
    """
    phi = cyclotomic_poly(m)
    g, u, v = qpoly_xgcd(f.coeffs, phi.coeffs)
    if len(g) > 1:
        raise NotCoprime(f"f and Phi_{m} share a factor of degree {len(g) - 1} over Q")
    d = denominators_lcm(u, v)
    if d == 1:
        raise NotCoprime(f"f and Phi_{m} are coprime modulo every prime")
    fac = factorize(d, budget=factor_budget)
    candidates = list(fac.factors)
    lower = not fac.complete
    if not candidates:
        raise FactoringBudgetExceeded(f"no prime factor of {d} found within budget")
    q = max(candidates)
    shared = len(pm_gcd(f.mod(q), phi.mod(q), q)) - 1
    if shared < 1:
        raise WeakringError(f"postcondition failed: f and Phi_{m} share no factor mod {q}")
    return FindQResult(q, d, lower, shared)


def findq(f: IntPolynomial, m: int, factor_budget: int = DEFAULT_FACTOR_BUDGET) -> PrimeModulus:
    res = findq_detailed(f, m, factor_budget)
    if res.lower_bound_only:
        raise FactoringBudgetExceeded(
            f"d only partially factored; largest prime found so far is {res.q}")
    return PrimeModulus.of(res.q)


def findq_xm1(f: IntPolynomial, m: int) -> int:
    """Variant that runs Euclid against x^m - 1 instead of Phi_m (as in the reference code)."""
    g, u, v = qpoly_xgcd(f.coeffs, [-1] + [0] * (m - 1) + [1])
    if len(g) > 1:
        raise NotCoprime("f shares a factor with x^m - 1")
    fac = factorize(denominators_lcm(u, v))
    return max(fac.factors)


# --------------------------------------------------------------------------
# constructions and searches


def construct_with_root(m: int, n: int, q, g: Optional[IntPolynomial] = None) -> IntPolynomial:
    """f = Phi_m g + q, so every root of Phi_m mod q is a root of f."""
    q = int(q)
    phi = cyclotomic_poly(m)
    k = n - phi.degree
    if k < 0:
        raise DegreeMismatch(f"n = {n} is smaller than phi({m}) = {phi.degree}")
    if g is None:
        g = IntPolynomial.x_power(k)
    if g.degree != k or not g.is_monic:
        raise DegreeMismatch(f"g must be monic of degree {k}")
    f = phi * g + IntPolynomial((q,))
    roots = [r for r in find_roots_mod(f, q) if r.order == m]
    if q % m == 1 and not roots:
        raise WeakringError(f"postcondition failed: no root of order {m} mod {q}")
    return f


@dataclass(frozen=True)
class TrinomialHit:
    f: IntPolynomial
    a: int
    b: int
    q: int
    alpha: int
    irreducibility: Optional[IrreducibilityVerdict]

    def to_json(self) -> dict:
        return {"f": self.f.to_json(), "a": str(self.a), "b": str(self.b), "q": str(self.q),
                "alpha": str(self.alpha),
                "irreducibility": None if self.irreducibility is None else self.irreducibility.value}


def search_trinomials(n: int, alpha_target: int, a_range: Iterable[int], b_range: Iterable[int],
                      q_min: int, check_irreducible: bool = True,
                      factor_budget: int = 10**6) -> list:
    """x^n + a x + b whose value at +-1 has a prime factor q >= q_min (a ascending, then b)."""
    if alpha_target not in (1, -1):
        raise ValueError("alpha_target must be 1 or -1")
    b_values = sorted(b_range)
    hits = []
    for a in sorted(a_range):
        for b in b_values:
            f = IntPolynomial.from_terms({n: 1, 1: a, 0: b})
            v = abs(f(alpha_target))
            if v < 2:
                continue
            fac = factorize(v, budget=factor_budget)
            if not fac.complete or not fac.factors:
                continue
            q = max(fac.factors)
            if q < q_min:
                continue
            alpha = alpha_target % q
            assert poly_eval_mod(f, alpha, q) == 0
            irr = is_probably_irreducible(f) if check_irreducible else None
            hits.append(TrinomialHit(f, a, b, q, alpha, irr))
    return hits


# --------------------------------------------------------------------------
# the family x^n + q - 1


@dataclass(frozen=True)
class FamilyReport:
    n: int
    q: int
    w: float
    prime_power: Tri
    p: Optional[int]
    q_minus_1_squarefree: Tri
    p_squared_condition: Tri
    tau: object
    tau_exceeds_one: bool
    monogenic_by_hypotheses: Tri
    eisenstein_prime: Optional[int]

    @property
    def conditions_1_to_3(self) -> Tri:
        vals = (self.prime_power, self.q_minus_1_squarefree, self.p_squared_condition)
        if Tri.FAILS in vals:
            return Tri.FAILS
        if Tri.UNKNOWN in vals:
            return Tri.UNKNOWN
        return Tri.HOLDS

    @property
    def provably_attackable(self) -> Tri:
        c = self.conditions_1_to_3
        if c is Tri.HOLDS:
            return Tri.of(self.tau_exceeds_one)
        return Tri.FAILS if (c is Tri.FAILS or not self.tau_exceeds_one) else Tri.UNKNOWN

    def to_json(self) -> dict:
        from .embedding import decimal_string
        return {"n": self.n, "q": str(self.q), "w": self.w,
                "conditions": {"n_prime_power": self.prime_power.value,
                               "q_minus_1_squarefree": self.q_minus_1_squarefree.value,
                               "p_squared_not_dividing": self.p_squared_condition.value,
                               "tau_gt_1": self.tau_exceeds_one},
                "p": self.p, "tau": decimal_string(self.tau),
                "monogenic_by_hypotheses": self.monogenic_by_hypotheses.value,
                "eisenstein_prime": self.eisenstein_prime,
                "provably_attackable": self.provably_attackable.value}


def family_polynomial(n: int, q: int) -> IntPolynomial:
    return IntPolynomial.from_terms({n: 1, 0: q - 1})


def check_family_conditions(n: int, q: int, w, factor_budget: int = DEFAULT_FACTOR_BUDGET
                            ) -> FamilyReport:
    """The four hypotheses making x^n + q - 1 provably attackable."""
    from .embedding import tau as tau_fn
    q = int(q)
    p = prime_power_base(n)
    c1 = Tri.of(p is not None)
    sq = Tri.of(is_squarefree(factorize(q - 1, budget=factor_budget)))
    if p is None:
        c3 = Tri.UNKNOWN
    else:
        p2 = p * p
        c3 = Tri.of((pow((1 - q) % p2, n, p2) - (1 - q)) % p2 != 0)
    t = tau_fn(n, q, w)
    mono = Tri.HOLDS if (c1, sq, c3) == (Tri.HOLDS,) * 3 else (
        Tri.FAILS if Tri.FAILS in (c1, sq, c3) else Tri.UNKNOWN)
    return FamilyReport(n, q, float(w), c1, p, sq, c3, t, bool(t > 1), mono,
                        eisenstein_prime(family_polynomial(n, q)))


def family_primes(n: int, start: int, count: int = 1, w=3.192) -> list:
    """First primes q >= start for which x^n + q - 1 meets conditions 1 to 3."""
    out = []
    q = int(gmpy2.next_prime(start - 1))
    while len(out) < count:
        if check_family_conditions(n, q, w).conditions_1_to_3 is Tri.HOLDS:
            out.append(q)
        q = int(gmpy2.next_prime(q))
    return out


# --------------------------------------------------------------------------
# cyclotomic immunity


@dataclass(frozen=True)
class ImmunityReport:
    m: int
    q: int
    roots: tuple
    min_order: int
    all_order_m: bool

    def to_json(self) -> dict:
        return {"m": self.m, "q": str(self.q),
                "roots": [{"root": str(r.root), "order": r.order} for r in self.roots],
                "min_order": self.min_order, "all_order_m": self.all_order_m}


def cyclotomic_immunity_check(m: int, q) -> ImmunityReport:
    """Every root of Phi_m modulo a split prime has order exactly m."""
    q = int(q)
    if q % m != 1:
        raise DoesNotSplit(f"{q} is not 1 mod {m}")
    roots = find_roots_mod(cyclotomic_poly(m), q, require_orders=True)
    if len(roots) != euler_phi(m):
        raise WeakringError(f"found {len(roots)} roots, expected {euler_phi(m)}")
    orders = [r.order for r in roots]
    return ImmunityReport(m, q, tuple(roots), min(orders), all(o == m for o in orders))


def zeta_family_polynomial(k: int) -> IntPolynomial:
    return IntPolynomial.from_terms({2 ** (k - 1): 1, 0: 1})


# --------------------------------------------------------------------------
# one-stop vetting


class VetVerdict(str, enum.Enum):
    VULNERABLE_POLYLWE = "vulnerable_polylwe"
    VULNERABLE_RINGLWE = "vulnerable_ringlwe"
    NOT_VULNERABLE = "not_vulnerable_by_these_tests"


@dataclass
class VulnerabilityReport:
    f: IntPolynomial
    q: int
    w: float
    variant: str
    roots_of_small_order: list
    tau: Optional[object]
    rho_prime_estimate: Optional[object]
    rho_prime_kind: str
    conditions: dict
    inequalities: dict
    verdict: VetVerdict
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        from .embedding import decimal_string
        return {
            "f": self.f.to_json(), "q": str(self.q), "w": self.w, "variant": self.variant,
            "roots_of_small_order": [{"root": str(r.root), "order": r.order}
                                     for r in self.roots_of_small_order],
            "tau": None if self.tau is None else decimal_string(self.tau),
            "rho_prime_estimate": (None if self.rho_prime_estimate is None
                                   else decimal_string(self.rho_prime_estimate)),
            "rho_prime_kind": self.rho_prime_kind,
            "conditions": {k: v.value for k, v in self.conditions.items()},
            "inequalities": self.inequalities,
            "verdict": self.verdict.value,
            "notes": list(self.notes),
        }


def _trinomial_ab(f: IntPolynomial):
    t = f.nonzero_terms()
    n = f.degree
    if f.is_monic and set(t) <= {n, 1, 0}:
        return t.get(1, 0), t.get(0, 0)
    return None


def _is_family(f: IntPolynomial, q: int) -> bool:
    t = f.nonzero_terms()
    return set(t) == {f.degree, 0} and t[f.degree] == 1 and t[0] == q - 1


def vet_parameters(f: IntPolynomial, q, w, variant: str = "polylwe",
                   max_order: int = SMALL_ORDER_BOUND, spectral_cap: int = SPECTRAL_DEGREE_CAP,
                   max_q: int = 1 << 40, precision_bits: int = 300) -> VulnerabilityReport:
    """Roots of small order, tau, rho' and the attack inequalities for (f, q, w)."""
    from .embedding import build_embedding, spectral_stats, tau as tau_fn
    q = int(q)
    w = float(w)
    n = f.degree
    sigma = w / math.sqrt(2 * math.pi)
    notes = []
    mod = as_modulus(q)
    try:
        roots = find_roots_mod(f, mod)
    except WeakringError as exc:
        roots = []
        notes.append(f"root finding failed: {exc}")
    small = [r for r in roots if r.order is not None and r.order <= max_order]
    if any(r.order is None for r in roots):
        notes.append("some root orders unknown (q - 1 not factored within budget)")
    cond = {}
    cond["R"] = Tri.of(poly_eval_mod(f, 1, q) == 0)
    cond["R_prime"] = Tri.of(any(r.order >= 2 for r in small)) if mod.order_computable or small \
        else Tri.UNKNOWN
    cond["Q"] = Tri.of(q <= max_q)
    if _is_family(f, q):
        cond["M"] = check_family_conditions(n, q, w).monogenic_by_hypotheses
    else:
        cond["M"] = Tri.UNKNOWN
    cond["S"] = Tri.of(splits_completely(f, mod) is not SplitVerdict.DOES_NOT_SPLIT)

    t = tau_fn(n, q, w)
    ineq = {}
    ineq["small_error_pm1"] = 8 * sigma * math.sqrt(n) < q
    order_r = [r for r in small if r.order >= 3]
    ineq["small_set"] = {str(r.order): (4 * sigma * n / r.order) ** r.order < q for r in order_r}
    prop2 = {}
    for r in order_r:
        a = r.root if r.root <= q // 2 else r.root - q
        num = gmpy2.mpz(a) ** (2 * r.order) - 1
        den = gmpy2.mpz(a) ** 2 - 1
        # a^(2r) overflows a double long before it troubles mpfr
        lhs = 8 * sigma * math.sqrt(n / r.order) * gmpy2.sqrt(gmpy2.mpfr(gmpy2.mpq(num, den)))
        prop2[str(r.root)] = bool(lhs < q)
    ineq["small_error_order_r"] = prop2

    rho_prime = None
    kind = "none"
    bound_met = None
    if n <= spectral_cap:
        try:
            emb = build_embedding(f, precision_bits)
            rep = spectral_stats(emb, w, q)
            rho_prime, kind, bound_met = rep.rho_prime, "numeric", rep.spectral_bound_met
        except (PrecisionInsufficient, PowerIterationDiverged, ValueError) as exc:
            notes.append(f"spectral statistics unavailable: {exc}")
    else:
        notes.append(f"spectral statistics skipped above degree {spectral_cap}")
        ab = _trinomial_ab(f)
        if ab is not None:
            rho_prime = gmpy2.sqrt(max(abs(ab[0]), abs(ab[1]), 1))
            kind = "heuristic_trinomial"
            bound_met = bool(rho_prime < q / (4 * w * n))
    ineq["spectral_bound"] = bound_met

    has_pm1 = cond["R"] is Tri.HOLDS or any(r.order == 2 for r in small)
    poly_vuln = (has_pm1 and ineq["small_error_pm1"]) or any(ineq["small_set"].values()) \
        or any(prop2.values())
    if variant == "ringlwe":
        if cond["R"] is Tri.HOLDS and bound_met:
            verdict = VetVerdict.VULNERABLE_RINGLWE
        else:
            verdict = VetVerdict.NOT_VULNERABLE
            if cond["R"] is Tri.HOLDS:
                notes.append("f(1) = 0 mod q but the spectral bound is not met; the attack may "
                             "still succeed in practice")
    else:
        verdict = VetVerdict.VULNERABLE_POLYLWE if poly_vuln else VetVerdict.NOT_VULNERABLE
    return VulnerabilityReport(f, q, w, variant, small, t, rho_prime, kind, cond, ineq,
                               verdict, notes)
