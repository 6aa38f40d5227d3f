"""Distinguishing attacks on Poly-LWE and transported Ring-LWE samples.

Both attacks evaluate every sample at a root alpha of f mod q and then scan
all guesses g for s(alpha).  A guess survives a sample when the residual
b(alpha) - g a(alpha) looks like an error value: it lies in a precomputed small
set S (small-set attack) or close to 0 mod q (small-error attack).
"""

from __future__ import annotations

import enum
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from ..embedding import EmbeddingData, transport_to_residue
from ..errors import AttackInfeasible, SampleVariantMismatch, SetTooLarge
from ..ringcore import RootInfo, poly_eval_mod
from ..sampling import POLYLWE, RINGLWE, LweSampleSet
from . import backend

log = logging.getLogger("weakring.attack")

CHUNK = 1 << 16
PROGRESS_EVERY = 1 << 20
MAX_ATTACK_Q = 1 << 40
SET_SIZE_CAP = 1 << 26
MAX_TIES = 16

SMALL_ERROR = "small_error"
SMALL_SET = "small_set"


class Verdict(str, enum.Enum):
    GUESS = "guess"
    NOT_PLWE = "not_plwe"
    INSUFFICIENT_SAMPLES = "insufficient_samples"


@dataclass(frozen=True)
class HistogramModQ:
    buckets: tuple
    zero_count: int

    @property
    def total(self) -> int:
        return sum(self.buckets)

    def to_json(self) -> dict:
        return {"buckets": list(self.buckets), "zero_count": self.zero_count}


def histogram_mod_q(values, q) -> HistogramModQ:
    """Ten buckets by floor(10 v / q) plus the number of exact zeros."""
    q = int(q)
    buckets = [0] * 10
    zeros = 0
    for v in values:
        v = int(v)
        if not 0 <= v < q:
            raise ValueError(f"value {v} outside [0, {q})")
        buckets[v * 10 // q] += 1
        zeros += v == 0
    return HistogramModQ(tuple(buckets), zeros)


@dataclass(frozen=True)
class ErrorValueSet:
    alpha: RootInfo
    values: np.ndarray            # sorted uint64 residues
    group_bound: int              # ceil(2 sigma) * ceil(n / r)
    group_bounds: tuple = ()      # per coordinate bound, ceil(2 sigma) times the group size

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def __contains__(self, r) -> bool:
        i = int(np.searchsorted(self.values, np.uint64(int(r))))
        return i < len(self.values) and int(self.values[i]) == int(r)


def _as_root(alpha, q: int) -> RootInfo:
    if isinstance(alpha, RootInfo):
        return alpha
    from ..numtheory import multiplicative_order
    a = int(alpha) % q
    return RootInfo(a, multiplicative_order(a, q) if a else None, q)


def build_error_set(alpha, sigma: float, n: int, q, cap: int = SET_SIZE_CAP) -> ErrorValueSet:
    """All residues sum_{j<r} c_j alpha^j mod q with |c_j| <= ceil(2 sigma) * (group size j).

    Coefficient i of the error lands in group i mod r because alpha^r = 1, so
    group j holds ceil(n/r) or floor(n/r) coefficients.
    """
    q = int(q)
    root = _as_root(alpha, q)
    if root.order is None:
        raise ValueError("the order of alpha is needed to build the error set")
    r = root.order
    t = math.ceil(2 * float(sigma)) if sigma > 0 else 0
    sizes = [len(range(j, n, r)) for j in range(r)]
    bounds = tuple(t * s for s in sizes)
    estimate = 1
    for b in bounds:
        estimate *= 2 * b + 1
    if estimate > cap:
        raise SetTooLarge(f"error set estimate {estimate} exceeds the cap {cap}")
    vals = np.zeros(1, dtype=np.int64)
    for j, b in enumerate(bounds):
        if b == 0:
            continue
        step = pow(root.root, j, q)
        shifts = np.array([c * step % q for c in range(-b, b + 1)], dtype=np.int64)
        vals = np.unique((vals[:, None] + shifts[None, :]) % q)
    return ErrorValueSet(root, vals.astype(np.uint64), t * math.ceil(n / r), bounds)


def brute_force_error_set(alpha: int, sigma: float, n: int, q: int) -> set:
    """e(alpha) mod q over every truncated error vector; only for tiny n."""
    t = math.ceil(2 * float(sigma)) if sigma > 0 else 0
    powers = [pow(alpha, i, q) for i in range(n)]
    out = set()
    for e in product(range(-t, t + 1), repeat=n):
        out.add(sum(c * p for c, p in zip(e, powers)) % q)
    return out


@dataclass
class AttackOutcome:
    verdict: Verdict
    survivors: list
    samples_consumed: int
    elapsed: float
    alpha: int
    q: int
    method: str
    variant: str
    longest_chain: int = -1
    longest_chain_guesses: list = field(default_factory=list)
    histograms: list = field(default_factory=list)
    backend: str = backend.BACKEND
    error_set: Optional[ErrorValueSet] = field(default=None, repr=False, compare=False)

    @property
    def guess(self) -> Optional[int]:
        return self.survivors[0] if self.verdict is Verdict.GUESS else None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "guess": None if self.guess is None else str(self.guess),
            "survivors": [str(s) for s in self.survivors],
            "samples_consumed": self.samples_consumed,
            "alpha": str(self.alpha),
            "q": str(self.q),
            "method": self.method,
            "variant": self.variant,
            "longest_chain": {"samples_survived": self.longest_chain,
                              "guesses": [str(g) for g in self.longest_chain_guesses]},
            "histograms": [h.to_json() for h in self.histograms],
            "elapsed_seconds": self.elapsed,
            "backend": self.backend,
        }


def _verdict(survivors) -> Verdict:
    if not survivors:
        return Verdict.NOT_PLWE
    if len(survivors) == 1:
        return Verdict.GUESS
    return Verdict.INSUFFICIENT_SAMPLES


def interval_cutoffs(q: int):
    """Accept r <= floor(q/4) or r >= ceil(3q/4): reject exactly when q/4 < r < 3q/4."""
    return q // 4, -(-3 * q // 4)


def _merge(parts):
    survivors, best, ties = [], -1, []
    for s, b, t in parts:
        survivors.extend(s)
        if b > best:
            best, ties = b, list(t)
        elif b == best and b >= 0:
            ties.extend(t)
    return survivors, best, ties[:MAX_TIES]


def scan(a_vals: Sequence[int], b_vals: Sequence[int], q: int, method: str,
         error_set: Optional[ErrorValueSet] = None, workers: int = 1,
         guesses: Optional[Sequence[int]] = None, max_q: int = MAX_ATTACK_Q,
         kernel=None):
    """Survivors, longest chain and tied guesses over all g in [0, q) (or ``guesses``).

    The range is cut into fixed chunks of 2^16 guesses; results are merged in
    chunk order, so the output does not depend on ``workers``.
    """
    q = int(q)
    a = np.array([int(v) % q for v in a_vals], dtype=np.uint64)
    b = np.array([int(v) % q for v in b_vals], dtype=np.uint64)
    mode = 0 if method == SMALL_ERROR else 1
    S = error_set.values if mode == 1 else np.zeros(0, dtype=np.uint64)
    S = np.ascontiguousarray(S, dtype=np.uint64)
    low_ok, high_ok = interval_cutoffs(q)
    if guesses is not None:
        return backend.scan_guesses(a, b, q, list(guesses), mode, S, low_ok, high_ok, MAX_TIES)
    if q > max_q:
        raise AttackInfeasible(f"q = {q} exceeds the attack limit {max_q}")
    kernel = kernel or backend.scan_chunk
    starts = range(0, q, CHUNK)

    def run(lo):
        return kernel(a, b, q, lo, min(lo + CHUNK, q), mode, S, low_ok, high_ok, MAX_TIES)

    parts = []
    t0 = time.perf_counter()
    next_report = PROGRESS_EVERY
    batch = max(1, workers) * 8
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i in range(0, len(starts), batch):
            block = starts[i:i + batch]
            parts.extend(pool.map(run, block) if pool else map(run, block))
            done = min(block[-1] + CHUNK, q)
            if done >= next_report and done < q:
                rate = done / max(time.perf_counter() - t0, 1e-9)
                log.info("checked %d of %d guesses, eta %.1fs", done, q, (q - done) / rate)
                next_report = (done // PROGRESS_EVERY + 1) * PROGRESS_EVERY
    finally:
        if pool:
            pool.shutdown()
    return _merge(parts)


def _check_root(samples: LweSampleSet, root: RootInfo):
    if poly_eval_mod(samples.f, root.root, samples.q) != 0:
        raise ValueError(f"{root.root} is not a root of f mod {samples.q}")


def evaluate_samples(samples: LweSampleSet, alpha: int, embedding: Optional[EmbeddingData] = None):
    """(a_i(alpha), b_i(alpha)) for every sample, transporting Ring-LWE vectors first."""
    q = samples.q
    if samples.variant == POLYLWE:
        ev = lambda c: _horner(c, alpha, q)  # noqa: E731
    else:
        if embedding is None:
            raise ValueError("Ring-LWE samples need the embedding to be transported")
        ev = lambda v: transport_to_residue(v, embedding, alpha, q)  # noqa: E731
    return [ev(a) for a, _ in samples.samples], [ev(b) for _, b in samples.samples]


def _horner(coeffs, alpha, q):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * alpha + int(c)) % q
    return acc


def _run(samples, root, method, error_set, workers, embedding=None, guesses=None,
         consumed_before=0, max_q=MAX_ATTACK_Q) -> AttackOutcome:
    t0 = time.perf_counter()
    a_vals, b_vals = evaluate_samples(samples, root.root, embedding)
    surv, best, ties = scan(a_vals, b_vals, samples.q, method, error_set, workers,
                            guesses, max_q)
    out = AttackOutcome(_verdict(surv), surv, consumed_before + samples.count,
                        time.perf_counter() - t0, root.root, samples.q, method,
                        samples.variant, best, ties, error_set=error_set)
    return out


def attack_small_set(samples: LweSampleSet, alpha, S: ErrorValueSet, workers: int = 1,
                     max_q: int = MAX_ATTACK_Q) -> AttackOutcome:
    """g survives when b_i(alpha) - g a_i(alpha) is in S for every sample."""
    if samples.variant != POLYLWE:
        raise SampleVariantMismatch("the small-set attack takes Poly-LWE samples")
    root = _as_root(alpha, samples.q)
    _check_root(samples, root)
    return _run(samples, root, SMALL_SET, S, workers, max_q=max_q)


def attack_small_error(samples: LweSampleSet, alpha, q=None, workers: int = 1,
                       max_q: int = MAX_ATTACK_Q) -> AttackOutcome:
    """g survives when every residual lifts into [0, q/4] or [3q/4, q)."""
    if samples.variant != POLYLWE:
        raise SampleVariantMismatch("the small-error attack takes Poly-LWE samples")
    if q is not None and int(q) != samples.q:
        raise ValueError("q does not match the sample set")
    root = _as_root(alpha, samples.q)
    _check_root(samples, root)
    return _run(samples, root, SMALL_ERROR, None, workers, max_q=max_q)


def attack_ringlwe(samples: LweSampleSet, embedding: EmbeddingData, q=None, workers: int = 1,
                   max_q: int = MAX_ATTACK_Q) -> AttackOutcome:
    """Transport each sample to F_q at alpha = 1, then run the small-error scan."""
    if samples.variant != RINGLWE:
        raise SampleVariantMismatch("attack_ringlwe takes embedded Ring-LWE samples")
    if q is not None and int(q) != samples.q:
        raise ValueError("q does not match the sample set")
    if embedding.f != samples.f:
        raise ValueError("embedding was built for a different polynomial")
    root = RootInfo(1, 1, samples.q)
    _check_root(samples, root)
    return _run(samples, root, SMALL_ERROR, None, workers, embedding, max_q=max_q)


def continue_attack(prior: AttackOutcome, new_samples: LweSampleSet,
                    embedding: Optional[EmbeddingData] = None,
                    error_set: Optional[ErrorValueSet] = None) -> AttackOutcome:
    """Re-test only the prior survivors against further samples."""
    if prior.verdict is not Verdict.INSUFFICIENT_SAMPLES:
        raise ValueError("only an InsufficientSamples outcome can be continued")
    if new_samples.variant != prior.variant or new_samples.q != prior.q:
        raise SampleVariantMismatch("new samples differ in variant or modulus")
    if new_samples.count == 0:
        return prior
    if prior.method == SMALL_SET:
        error_set = error_set if error_set is not None else prior.error_set
        if error_set is None:
            raise ValueError("the small-set attack needs its error set to continue")
    root = RootInfo(prior.alpha, None, prior.q)
    return _run(new_samples, root, prior.method, error_set, 1, embedding,
                guesses=prior.survivors, consumed_before=prior.samples_consumed)
